"""Shared fixtures.

The pipeline fixtures are session-scoped and share one forecast cache:
base-model fits are keyed on exact window values, so reruns on perturbed
data only refit windows whose contents actually changed.
"""

import numpy as np
import pytest

from quartercast import (
    Dataset,
    FiscalQuarter,
    ForecastCache,
    ForestParams,
    QuarterlySeries,
    SynthSpec,
    generate_synthetic,
    parse_quarter,
)

START = FiscalQuarter(2009, 1)


@pytest.fixture(scope="session")
def accept_spec():
    return SynthSpec(n_geos=6, n_quarters=28, noise_scale=0.5, indicator_linkage=1.0, seed=20150101)


@pytest.fixture(scope="session")
def accept_dataset(accept_spec):
    return generate_synthetic(accept_spec)


@pytest.fixture(scope="session")
def accept_ranges():
    return (
        (parse_quarter("2013Q1"), parse_quarter("2014Q4")),
        (parse_quarter("2015Q1"), parse_quarter("2015Q4")),
    )


@pytest.fixture(scope="session")
def accept_cache():
    return ForecastCache()


@pytest.fixture(scope="session")
def accept_forest_params():
    return ForestParams(n_trees=200, seed=77)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic(SynthSpec(n_geos=3, n_quarters=26, noise_scale=0.5, seed=4242))


@pytest.fixture(scope="session")
def small_ranges():
    return (
        (parse_quarter("2012Q3"), parse_quarter("2014Q2")),
        (parse_quarter("2014Q3"), parse_quarter("2015Q2")),
    )


@pytest.fixture(scope="session")
def small_cache():
    return ForecastCache()


def constant_dataset(n_geos=2, n_quarters=24, value=100.0):
    revenue = {
        f"Geo_{i+1}": QuarterlySeries(f"Geo_{i+1}", START, [value * (i + 1)] * n_quarters)
        for i in range(n_geos)
    }
    return Dataset.build(revenue)


@pytest.fixture
def const_dataset():
    return constant_dataset()


def ar1_series(phi=0.6, n=200, seed=7, level=50.0, series_id="ar1"):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    y = np.zeros(n)
    for t in range(1, n):
        y[t] = phi * y[t - 1] + e[t]
    return QuarterlySeries(series_id, FiscalQuarter(1950, 1), y + level)
