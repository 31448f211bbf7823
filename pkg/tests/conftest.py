"""Shared fixtures and random generators for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from kontact.config import RunConfig
from kontact.expr import Rational, ScalarExpr, Var
from kontact.forms import Chart, DifferentialForm


@pytest.fixture
def config():
    return RunConfig()


@pytest.fixture
def fast_config():
    """Fewer sample points for structural identities that hold exactly."""
    return RunConfig(n_sample_points=16)


def rand_rational(rng: random.Random, lo=-3, hi=3, denom=4) -> Fraction:
    return Fraction(rng.randint(lo * denom, hi * denom), denom)


def rand_expr(rng: random.Random, names, depth: int = 2,
              transcendental: bool = False) -> ScalarExpr:
    """A random expression; polynomial by default, everywhere defined."""
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return Rational(rand_rational(rng))
        return Var(rng.choice(names))
    roll = rng.random()
    if roll < 0.35:
        return (rand_expr(rng, names, depth - 1, transcendental)
                + rand_expr(rng, names, depth - 1, transcendental))
    if roll < 0.7:
        return (rand_expr(rng, names, depth - 1, transcendental)
                * rand_expr(rng, names, depth - 1, transcendental))
    if roll < 0.85:
        return rand_expr(rng, names, depth - 1, transcendental) ** rng.randint(2, 3)
    if transcendental:
        inner = rand_expr(rng, names, depth - 1, False)
        if roll < 0.93:
            from kontact.expr import exp

            return exp(Rational(Fraction(1, 4)) * Var(rng.choice(names)))
        from kontact.expr import log

        return log(inner * inner + 1)
    return (rand_expr(rng, names, depth - 1)
            - rand_expr(rng, names, depth - 1))


def rand_chart(rng: random.Random, dim: int) -> Chart:
    return Chart([f"x_{i}" for i in range(dim)])


def rand_form(rng: random.Random, chart: Chart, degree: int,
              n_terms: int = 2, depth: int = 2) -> DifferentialForm:
    names = list(chart.coords)
    coeffs = {}
    for _ in range(n_terms):
        key = tuple(sorted(rng.sample(range(chart.dim), degree)))
        coeffs[key] = rand_expr(rng, names, depth)
    return DifferentialForm(chart, degree, coeffs)
