import json
import math
import os

import numpy as np
import pytest

from qfolio import ansatz, engine
from qfolio.errors import ParamLengthMismatch, QfolioError
from qfolio.oracle import solve_exact
from qfolio.qubo import IsingHamiltonian, QuboProblem, build_qubo, to_ising
from qfolio.simulator import SampleHistogram, run


def single_spin_problem() -> tuple[QuboProblem, IsingHamiltonian]:
    problem = QuboProblem(n=1, Q=np.array([[-2.0]]), offset=1.0, q=0.5, alpha=1.0, budget=1)
    return problem, to_ising(problem)


def rx_circuit() -> ansatz.ParameterizedCircuit:
    from qfolio.simulator import Gate, GateKind

    return ansatz.ParameterizedCircuit(
        n=1,
        depth=1,
        gates=(Gate(kind=GateKind.RX, qubits=(0,), param_slot=0),),
        param_count=1,
        family="two_local",
        initial_state="zero",
    )


class TestEvaluateCost:
    def test_qaoa_zero_parameters_give_table_mean(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_qaoa(4, 2, ham)
        cost = engine.evaluate_cost(circuit, np.zeros(4), ham, problem4)
        assert cost == pytest.approx(float(np.mean(ham.energy_table())), abs=1e-12)

    def test_zero_state_ansatz_reads_first_table_entry(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_real_amplitudes(4, 2)
        cost = engine.evaluate_cost(circuit, np.zeros(12), ham, problem4)
        assert cost == pytest.approx(float(ham.energy_table()[0]), abs=1e-12)

    def test_sampled_matches_exact_within_standard_error(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_two_local(4, 2)
        rng = np.random.Generator(np.random.PCG64(9))
        theta = rng.uniform(0, 2 * math.pi, size=circuit.param_count)
        exact = engine.evaluate_cost(circuit, theta, ham, problem4, "exact")
        shots = 2**16
        sampled = engine.evaluate_cost(circuit, theta, ham, problem4, "sampled", 7, shots)

        table = ham.energy_table()
        probs = run(circuit, theta).probabilities()
        variance = float(probs @ table**2 - (probs @ table) ** 2)
        se = math.sqrt(variance / shots)
        assert abs(sampled - exact) < 4 * se + 1e-12

    def test_wrong_parameter_count(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_qaoa(4, 2, ham)
        with pytest.raises(ParamLengthMismatch):
            engine.evaluate_cost(circuit, np.zeros(3), ham, problem4)


class TestOptimizerConfig:
    def test_rejects_unknown_method(self):
        with pytest.raises(QfolioError):
            engine.OptimizerConfig(method="adam")

    def test_rejects_unknown_cost_mode(self):
        with pytest.raises(QfolioError):
            engine.OptimizerConfig(cost_mode="noisy")

    def test_rejects_nonpositive_budget(self):
        with pytest.raises(QfolioError):
            engine.OptimizerConfig(max_evaluations=0)

    def test_rejects_nonpositive_shots(self):
        with pytest.raises(QfolioError):
            engine.OptimizerConfig(shots=0)

    def test_dict_round_trip(self):
        config = engine.OptimizerConfig(method="spsa", max_evaluations=77, seed=3)
        assert engine.OptimizerConfig.from_dict(config.to_dict()) == config


class TestMinimize:
    def test_finds_single_spin_ground_state(self):
        problem, ham = single_spin_problem()
        config = engine.OptimizerConfig(max_evaluations=200, seed=1)
        trace = engine.minimize(rx_circuit(), ham, problem, config)
        # RX(theta)|0> has P(1) = sin^2(theta/2); ground energy is -2 at theta=pi
        assert trace.best_cost == pytest.approx(-2.0, abs=1e-3)
        folded = trace.best_theta[0] % (2 * math.pi)
        assert folded == pytest.approx(math.pi, abs=0.1)

    def test_budget_of_one_records_one_evaluation(self):
        problem, ham = single_spin_problem()
        for method in engine.METHODS:
            config = engine.OptimizerConfig(
                method=method, max_evaluations=1, seed=0
            )
            trace = engine.minimize(rx_circuit(), ham, problem, config)
            assert len(trace.evaluations) == 1
            assert trace.deltas == ()
            assert trace.best_cost == trace.evaluations[0][2]

    def test_budget_is_never_exceeded(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_two_local(4, 2)
        for method in engine.METHODS:
            config = engine.OptimizerConfig(method=method, max_evaluations=40, seed=2)
            trace = engine.minimize(circuit, ham, problem4, config)
            assert len(trace.evaluations) <= 40
            if len(trace.evaluations) == 40:
                assert trace.terminated == "budget"

    def test_spsa_improves_over_start(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_efficient_su2(4, 2)
        config = engine.OptimizerConfig(method="spsa", max_evaluations=301, seed=5)
        trace = engine.minimize(circuit, ham, problem4, config)
        assert trace.best_cost < trace.evaluations[0][2]

    def test_running_best_non_increasing(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_two_local(4, 4)
        config = engine.OptimizerConfig(max_evaluations=150, seed=3)
        trace = engine.minimize(circuit, ham, problem4, config)
        best = trace.running_best()
        assert all(b <= a + 1e-15 for a, b in zip(best, best[1:]))
        assert best[-1] == trace.best_cost

    def test_exact_mode_is_deterministic(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_two_local(4, 2)
        config = engine.OptimizerConfig(max_evaluations=60, seed=8)
        a = engine.minimize(circuit, ham, problem4, config)
        b = engine.minimize(circuit, ham, problem4, config)
        assert [c for _, _, c in a.evaluations] == [c for _, _, c in b.evaluations]
        assert a.final_histogram.counts == b.final_histogram.counts
        assert a.final_histogram.seed == b.final_histogram.seed

    def test_sampled_mode_is_deterministic(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_real_amplitudes(4, 1)
        config = engine.OptimizerConfig(
            max_evaluations=30, seed=4, cost_mode="sampled", shots=256
        )
        a = engine.minimize(circuit, ham, problem4, config)
        b = engine.minimize(circuit, ham, problem4, config)
        assert [c for _, _, c in a.evaluations] == [c for _, _, c in b.evaluations]

    def test_seed_changes_the_start_point(self, problem4):
        ham = to_ising(problem4)
        circuit = ansatz.build_two_local(4, 1)
        t0 = engine.minimize(
            circuit, ham, problem4, engine.OptimizerConfig(max_evaluations=5, seed=0)
        )
        t1 = engine.minimize(
            circuit, ham, problem4, engine.OptimizerConfig(max_evaluations=5, seed=1)
        )
        assert not np.allclose(t0.evaluations[0][1], t1.evaluations[0][1])


class TestTraceInvariants:
    def _histogram(self):
        return SampleHistogram(counts={"0": 4}, shots=4, seed=1)

    def test_deltas_must_match_costs(self):
        with pytest.raises(QfolioError):
            engine.OptimizationTrace(
                evaluations=((0, np.zeros(1), 1.0), (1, np.zeros(1), 0.5)),
                deltas=(0.25,),
                best_theta=np.zeros(1),
                best_cost=0.5,
                final_histogram=self._histogram(),
                terminated="budget",
            )

    def test_best_cost_must_be_minimum(self):
        with pytest.raises(QfolioError):
            engine.OptimizationTrace(
                evaluations=((0, np.zeros(1), 1.0), (1, np.zeros(1), 0.5)),
                deltas=(-0.5,),
                best_theta=np.zeros(1),
                best_cost=1.0,
                final_histogram=self._histogram(),
                terminated="budget",
            )

    def test_empty_trace_rejected(self):
        with pytest.raises(QfolioError):
            engine.OptimizationTrace(
                evaluations=(),
                deltas=(),
                best_theta=np.zeros(1),
                best_cost=0.0,
                final_histogram=self._histogram(),
                terminated="budget",
            )


class TestRunSingle:
    def test_top_bitstrings_are_sorted_and_costed(self, problem4):
        ham = to_ising(problem4)
        config = engine.OptimizerConfig(max_evaluations=50, seed=0)
        result = engine.run_single("two_local", 2, 0, ham, problem4, config, None)
        rows = result.top_bitstrings
        assert sum(p for _, p, _ in rows) <= 1.0 + 1e-9
        probs = [p for _, p, _ in rows]
        assert probs == sorted(probs, reverse=True)
        for bits, _, cost in rows:
            assert cost == pytest.approx(problem4.evaluate(bits), abs=1e-12)

    def test_ties_break_by_bitstring(self):
        hist = SampleHistogram(counts={"11": 2, "00": 2, "10": 1}, shots=5, seed=0)
        problem = QuboProblem(
            n=2, Q=np.zeros((2, 2)), offset=0.0, q=0.5, alpha=1.0, budget=1
        )
        rows = engine._top_bitstrings(hist, problem)
        assert [r[0] for r in rows] == ["00", "11", "10"]

    def test_metadata_carries_run_seed(self, problem4):
        ham = to_ising(problem4)
        config = engine.OptimizerConfig(max_evaluations=5, seed=99)
        result = engine.run_single("qaoa", 2, 3, ham, problem4, config, None)
        assert result.metadata.seed == 3
        assert result.metadata.config.seed == 3

    def test_json_document_shape(self, problem4):
        ham = to_ising(problem4)
        config = engine.OptimizerConfig(max_evaluations=5, seed=0)
        result = engine.run_single("qaoa", 2, 0, ham, problem4, config, ("0110", -1.0))
        doc = json.loads(result.to_json())
        assert doc["schema"] == "qfolio.run_result.v1"
        assert doc["ground_truth"] == {"bitstring": "0110", "cost": -1.0}
        assert len(doc["trace"]["evaluations"]) == 5
        assert all(len(pair) == 2 for pair in doc["trace"]["evaluations"])


class TestExperimentGrid:
    CONFIG = engine.OptimizerConfig(max_evaluations=40, seed=0)

    def test_cell_count_and_order(self, snapshot4):
        results = engine.run_experiment_grid(
            snapshot4,
            q=0.5,
            alpha=2.0,
            budget=2,
            families=["qaoa", "real_amplitudes"],
            depths=[1, 2],
            seeds=[0, 1],
            config=self.CONFIG,
        )
        assert len(results) == 8
        keys = [(r.metadata.family, r.metadata.depth, r.metadata.seed) for r in results]
        assert keys == [
            (f, d, s)
            for f in ["qaoa", "real_amplitudes"]
            for d in [1, 2]
            for s in [0, 1]
        ]

    def test_oracle_bounds_every_run(self, snapshot4, problem4):
        gt = solve_exact(problem4)
        results = engine.run_experiment_grid(
            snapshot4,
            q=0.5,
            alpha=2.0,
            budget=2,
            families=["qaoa"],
            depths=[2],
            seeds=[0, 1, 2],
            config=self.CONFIG,
        )
        for res in results:
            assert res.ground_truth == (gt.best_bitstring, gt.best_cost)
            assert res.best_sampled_cost() >= gt.best_cost - 1e-9

    def test_rejects_empty_axes_and_unknown_family(self, snapshot4):
        with pytest.raises(QfolioError):
            engine.run_experiment_grid(
                snapshot4,
                q=0.5,
                alpha=2.0,
                budget=2,
                families=[],
                depths=[1],
                seeds=[0],
                config=self.CONFIG,
            )
        with pytest.raises(QfolioError):
            engine.run_experiment_grid(
                snapshot4,
                q=0.5,
                alpha=2.0,
                budget=2,
                families=["bogus"],
                depths=[1],
                seeds=[0],
                config=self.CONFIG,
            )

    def test_threaded_matches_serial(self, snapshot4):
        kwargs = dict(
            q=0.5,
            alpha=2.0,
            budget=2,
            families=["two_local", "qaoa"],
            depths=[2],
            seeds=[0, 1],
            config=self.CONFIG,
        )
        serial = engine.run_experiment_grid(snapshot4, jobs=1, **kwargs)
        threaded = engine.run_experiment_grid(snapshot4, jobs=2, **kwargs)
        assert [r.to_json() for r in serial] == [r.to_json() for r in threaded]

    def test_out_dir_layout_and_rerun_identity(self, snapshot4, tmp_path):
        kwargs = dict(
            q=0.5,
            alpha=2.0,
            budget=2,
            families=["qaoa"],
            depths=[1, 2],
            seeds=[0],
            config=self.CONFIG,
        )
        first = tmp_path / "a"
        second = tmp_path / "b"
        engine.run_experiment_grid(snapshot4, out_dir=str(first), **kwargs)
        engine.run_experiment_grid(snapshot4, out_dir=str(second), **kwargs)
        for depth in (1, 2):
            rel = os.path.join("qaoa", str(depth), "0", "result.json")
            a = (first / rel).read_bytes()
            assert a == (second / rel).read_bytes()
            assert a.endswith(b"\n")
        for name in ("convergence.csv", "histogram.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_convergence_csv_contents(self, snapshot4, tmp_path):
        results = engine.run_experiment_grid(
            snapshot4,
            q=0.5,
            alpha=2.0,
            budget=2,
            families=["qaoa"],
            depths=[1],
            seeds=[0],
            config=engine.OptimizerConfig(max_evaluations=10, seed=0),
            out_dir=str(tmp_path),
        )
        lines = (tmp_path / "convergence.csv").read_text().strip().splitlines()
        assert lines[0] == "family,depth,seed,t,cost"
        assert len(lines) == 1 + len(results[0].trace.evaluations)
        family, depth, seed, t, cost = lines[1].split(",")
        assert (family, depth, seed, t) == ("qaoa", "1", "0", "0")
        assert float(cost) == results[0].trace.evaluations[0][2]

    def test_histogram_csv_averages_over_seeds(self, snapshot4, tmp_path):
        results = engine.run_experiment_grid(
            snapshot4,
            q=0.5,
            alpha=2.0,
            budget=2,
            families=["real_amplitudes"],
            depths=[1],
            seeds=[0, 1],
            config=engine.OptimizerConfig(max_evaluations=10, seed=0),
            out_dir=str(tmp_path),
        )
        acc: dict[str, float] = {}
        for res in results:
            for bits, prob, _ in res.top_bitstrings:
                acc[bits] = acc.get(bits, 0.0) + prob
        lines = (tmp_path / "histogram.csv").read_text().strip().splitlines()
        assert lines[0] == "family,depth,bitstring,probability"
        parsed = [line.split(",") for line in lines[1:]]
        assert [row[2] for row in parsed] == sorted(acc)
        for _, _, bits, prob in parsed:
            assert float(prob) == pytest.approx(acc[bits] / 2, abs=1e-15)
