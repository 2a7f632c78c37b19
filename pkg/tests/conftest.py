"""Shared fixtures: generated benchmark CSVs, loaded datasets, and a small
trained bundle for service and CLI tests."""
import numpy as np
import pytest

from factorlens import synth
from factorlens.bundle import make_bundle
from factorlens.configs import builtin_config
from factorlens.datasets import load_dataset, make_split_plan
from factorlens.evaluation import choose_lambda
from factorlens.explainers import fit_global, fit_incremental, fit_subglobal
from factorlens.forest import ForestConfig, train_forest


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    synth.generate_all(d)
    return d


@pytest.fixture(scope="session")
def mpg_dataset(data_dir):
    return load_dataset(builtin_config("auto_mpg", data_dir / "auto_mpg.csv"))


@pytest.fixture(scope="session")
def heart_dataset(data_dir):
    return load_dataset(builtin_config("heart_disease", data_dir / "heart_disease.csv"))


@pytest.fixture(scope="session")
def house_dataset(data_dir):
    return load_dataset(builtin_config("house_sales", data_dir / "house_sales.csv"))


@pytest.fixture(scope="session")
def mpg_bundle(mpg_dataset):
    """Small forest plus explainers on the fuel-economy training split."""
    ds = mpg_dataset
    plan = make_split_plan(ds.n_rows, 7)
    tr = plan.train_indices
    forest = train_forest(
        ds.X[tr], ds.y[tr], ForestConfig(n_trees=20, max_depth=8, seed=7), ds.task
    )
    yhat = forest.predict(ds.X[tr])
    g = fit_global(ds.X[tr], yhat)
    s = fit_subglobal(ds.X[tr], yhat)
    lam = choose_lambda(ds.X[tr], yhat, s.rule)
    inc = fit_incremental(ds.X[tr], yhat, lam, rule=s.rule)
    return make_bundle(ds, 7, forest, g, s, inc)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
