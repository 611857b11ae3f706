from pathlib import Path

import pytest

from burdenaudit import classifier, dataset as ds, synthgen

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "burdenaudit" / "data"
SEED = 42


@pytest.fixture(scope="session")
def taiwan_schema():
    return ds.load_schema(DATA_DIR / "taiwan_schema.yaml")


@pytest.fixture(scope="session")
def taiwan_csv():
    return DATA_DIR / "taiwan_fixture.csv"


@pytest.fixture(scope="session", params=["da", "db"])
def preset(request):
    return request.param


@pytest.fixture(scope="session")
def preset_run():
    """(dataset, features, sensitive, labels, model) per preset, trained once."""
    cache = {}

    def get(name):
        if name not in cache:
            data = synthgen.generate(synthgen.PRESETS[name](), SEED)
            X, S, Y = ds.split(data)
            model = classifier.train(X, Y, feature_names=data.feature_names)
            cache[name] = (data, X, S, Y, model)
        return cache[name]

    return get
