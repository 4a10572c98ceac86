import json
import logging
import math

import pytest

from tcaging.curves import activation_series, hazard_series
from tcaging.lifespan import determine_death
from tcaging.prng import Xoshiro256StarStar, splitmix64
from tcaging.synth import (
    ProfileError,
    SynthProfile,
    analytic_half_life,
    generate,
    hazard_function,
    write_outputs,
)


def profile(**kw):
    base = {
        "n_test_cases": 40,
        "horizon_days": 60,
        "activation": {"kind": "constant", "p": 0.7},
        "hazard": {"kind": "quadratic", "initial": 0.12, "zero_age": 800},
        "seed": 11,
    }
    base.update(kw)
    return SynthProfile.from_dict(base)


class TestPrng:
    def test_splitmix_reference(self):
        state, out = 1234567, []
        for _ in range(5):
            state, v = splitmix64(state)
            out.append(v)
        assert out == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ]

    def test_xoshiro_reference(self):
        rng = Xoshiro256StarStar(state=(1, 2, 3, 4))
        assert [rng.next_u64() for _ in range(6)] == [
            11520,
            0,
            1509978240,
            1215971899390074240,
            1216172134540287360,
            607988272756665600,
        ]

    def test_unit_interval(self):
        rng = Xoshiro256StarStar(5)
        draws = [rng.random() for _ in range(2000)]
        assert all(0.0 <= d < 1.0 for d in draws)
        assert abs(sum(draws) / len(draws) - 0.5) < 0.03

    def test_randbelow(self):
        rng = Xoshiro256StarStar(5)
        draws = [rng.randbelow(7) for _ in range(2000)]
        assert set(draws) == set(range(7))

    def test_zero_state_rejected(self):
        with pytest.raises(ValueError):
            Xoshiro256StarStar(state=(0, 0, 0, 0))


class TestProfiles:
    @pytest.mark.parametrize(
        "spec",
        [
            {"kind": "linear", "initial": 0.1, "zero_age": 301},
            {"kind": "quadratic", "initial": 0.12, "zero_age": 800},
            {"kind": "exponential", "initial": 0.2, "decay": 0.013},
            {"kind": "bathtub", "initial": 0.2, "decay": 0.02, "decay_end": 100, "wear_start": 300, "growth": 0.01},
        ],
    )
    def test_analytic_half_life_brackets(self, spec):
        d = analytic_half_life(spec)
        q = hazard_function(spec)
        assert q(d) <= q(0) / 2 < q(d - 1)

    def test_quadratic_reference(self):
        assert analytic_half_life({"kind": "quadratic", "initial": 0.12, "zero_age": 800}) == 235
        assert math.ceil(800 * (1 - 1 / math.sqrt(2))) == 235

    def test_constant_has_none(self):
        assert analytic_half_life({"kind": "constant", "q": 0.1}) is None

    @pytest.mark.parametrize(
        "kw",
        [
            {"activation": {"kind": "constant", "p": 1.2}},
            {"hazard": {"kind": "exponential", "initial": 2.0, "decay": 0.1}},
            {"hazard": {"kind": "weibull"}},
            {"hazard": {"kind": "linear", "initial": 0.1}},
            {"creation": {"kind": "batches", "days": [0, 99]}},
            {"creation": {"kind": "batches", "days": [0, 1], "sizes": [1, 2]}},
            {"session": "hourly"},
            {"n_test_cases": 0},
            {"colour": "red"},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ProfileError):
            profile(**kw)

    def test_round_trip(self, tmp_path):
        p = profile(creation={"kind": "batches", "days": [0, 10], "sizes": [30, 10]})
        path = tmp_path / "p.json"
        path.write_text(json.dumps(p.to_dict()))
        assert SynthProfile.load(path) == p


class TestGenerate:
    def test_degenerate_profile(self):
        p = profile(activation={"kind": "constant", "p": 1.0}, hazard={"kind": "constant", "q": 0.0},
                    creation={"kind": "batches", "days": [0]}, n_test_cases=5, horizon_days=10)
        ds, _ = generate(p)
        assert len(ds.executions) == 50
        haz = hazard_series(ds, determine_death(ds), 1)
        assert all(pt.rate == 0.0 for pt in haz.points)
        act = activation_series(ds, determine_death(ds), 1)
        assert all(pt.rate == 1.0 for pt in act.points)

    def test_deterministic(self, tmp_path):
        p = profile()
        for name in ("a", "b"):
            ds, truth = generate(p)
            write_outputs(ds, truth, tmp_path / name)
        for f in ("creations.csv", "executions.csv", "ground_truth.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_seed_changes_output(self):
        a, _ = generate(profile(seed=1))
        b, _ = generate(profile(seed=2))
        assert a.executions != b.executions

    def test_nothing_before_creation_and_no_warnings(self, caplog):
        with caplog.at_level(logging.WARNING):
            ds, _ = generate(profile(n_test_cases=100))
        assert caplog.records == []
        assert ds.warning_count == 0
        created = {c.test_case: c.creation_time for c in ds.creations}
        assert all(e.execution_time >= created[e.test_case] for e in ds.executions)

    def test_nightly_sessions(self):
        ds, _ = generate(profile())
        for e in ds.executions:
            assert e.session_start.date() == e.execution_time.date()
            assert e.session_start.hour == 20 and e.session_start.minute == 0

    def test_binomial_concentration(self):
        p = profile(
            n_test_cases=1000,
            horizon_days=20,
            activation={"kind": "constant", "p": 0.8},
            hazard={"kind": "exponential", "initial": 0.3, "decay": 0.05},
            creation={"kind": "batches", "days": [0]},
            seed=2024,
        )
        ds, _ = generate(p)
        q = hazard_function(p.hazard)
        haz = hazard_series(ds, determine_death(ds), 1)
        checked = 0
        for pt in haz.points:
            if pt.denominator >= 100:
                qt = q(pt.age_days)
                assert abs(pt.rate - qt) <= 3 * math.sqrt(qt * (1 - qt) / pt.denominator)
                checked += 1
        assert checked == 20
