import numpy as np
import pytest

from ir_augment.tabular import ColumnKind, Dataset


def make_dataset(columns, target):
    """Build a Dataset from {name: values} where string lists become nominal."""
    names, kinds, categories, cols = [], [], [], []
    for name, values in columns.items():
        names.append(name)
        if isinstance(values[0], str):
            cats = []
            codes = []
            for v in values:
                if v not in cats:
                    cats.append(v)
                codes.append(cats.index(v))
            kinds.append(ColumnKind.NOMINAL)
            categories.append(tuple(cats))
            cols.append(np.array(codes, dtype=np.float64))
        else:
            kinds.append(ColumnKind.NUMERIC)
            categories.append(None)
            cols.append(np.asarray(values, dtype=np.float64))
    return Dataset(names, kinds, categories, np.column_stack(cols), names.index(target))


def make_skewed_dataset(n=400, seed=0, n_num=3, nominal=False, tail_frac=0.05):
    """Synthetic regression data with a detached high target tail (so the
    adjusted-boxplot relevance function is always buildable)."""
    rng = np.random.default_rng(seed)
    n_tail = max(2, int(round(tail_frac * n)))
    y = np.concatenate([rng.normal(10.0, 2.0, size=n - n_tail), rng.uniform(25.0, 40.0, size=n_tail)])
    rng.shuffle(y)
    columns = {}
    for i in range(n_num):
        columns[f"x{i}"] = y * (0.5 + 0.3 * i) + rng.normal(0.0, 2.0, size=n)
    if nominal:
        columns["c"] = ["hi" if v > 20 else ("lo" if v < 8 else "mid") for v in y]
    columns["y"] = y
    return make_dataset(columns, "y")


@pytest.fixture
def skewed_ds():
    return make_skewed_dataset(n=400, seed=13, n_num=2, nominal=True)
