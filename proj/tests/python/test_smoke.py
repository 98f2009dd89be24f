"""Smoke tests for the python bindings: generate, analyze, simulate, audit."""

import json
import unittest

import fedlock


class SmokeTest(unittest.TestCase):
    def scenario(self, **kw):
        args = dict(m=8, nr=(2, 4), uavg=1.5, pr=0.5, nmax=25,
                    lrange_us=(15, 50), points=20, reps=10, seed=42)
        args.update(kw)
        return fedlock.Scenario(**args)

    def test_generation_is_deterministic(self):
        sc = self.scenario()
        a = fedlock.generate(sc, point=10, rep=3)
        b = fedlock.generate(sc, point=10, rep=3)
        self.assertEqual(a.to_json(), b.to_json())
        self.assertEqual(fedlock.validate(a), [])
        doc = json.loads(a.to_json())
        self.assertEqual(doc["m"], 8)
        self.assertGreaterEqual(len(doc["tasks"]), 1)

    def test_json_round_trip(self):
        sc = self.scenario()
        ts = fedlock.generate(sc, point=8, rep=0)
        back = fedlock.TaskSet.from_json(ts.to_json())
        self.assertEqual(back.to_json(), ts.to_json())

    def test_analysis_modes_are_ordered(self):
        sc = self.scenario()
        accepted = 0
        for rep in range(8):
            ts = fedlock.generate(sc, point=8, rep=rep)
            ep = fedlock.analyze(ts, mode="ep")
            en = fedlock.analyze(ts, mode="en")
            fed = fedlock.analyze(ts, mode="fedfp")
            if en.schedulable:
                self.assertTrue(ep.schedulable)
            if ep.schedulable:
                self.assertTrue(fed.schedulable)
                accepted += 1
        self.assertGreater(accepted, 0)

    def test_simulation_respects_bounds(self):
        sc = self.scenario()
        for rep in range(8):
            ts = fedlock.generate(sc, point=8, rep=rep)
            outcome = fedlock.analyze(ts, mode="ep")
            if not outcome.schedulable:
                continue
            trace = fedlock.simulate(ts, outcome.assignment, horizon_periods=2.0)
            self.assertEqual(
                fedlock.check_response_bounds(trace, outcome, ts), 0)
            self.assertEqual(fedlock.check_priority_ceiling(
                trace, ts, outcome.assignment), 0)
            self.assertEqual(fedlock.check_single_lower_priority_blocking(
                trace, ts, outcome.assignment), 0)
            return
        self.fail("no schedulable replicate found")

    def test_grid_csv(self):
        sc = self.scenario(points=4, reps=3, m=4, nr=(2, 2), nmax=10)
        csv = fedlock.run_grid(sc, modes=["ep", "fedfp"], jobs=2)
        lines = [l for l in csv.splitlines() if l]
        self.assertEqual(len(lines), 1 + 4 * 2)
        self.assertTrue(lines[0].startswith("scenario,"))


if __name__ == "__main__":
    unittest.main()
