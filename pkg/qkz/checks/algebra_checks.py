"""Checks for R-matrices, monodromies, block relations, vacuum actions and scalar functions."""

from typing import Any, Dict, List, Sequence

import numpy as np

from ..algebra.monodromy import (
    EXCHANGE_KINDS,
    commutation_residuals,
    exchange_residual,
    vacuum_actions,
)
from ..algebra.qfunctions import qpochhammer, qpochhammer_mp, scalar_equation_residuals
from ..algebra.rmatrix import antisymmetry_residual, boltzmann, boltzmann_mp, ybe_residual
from .base import Check, Outcome

# Imaginary offsets keep spectral arguments away from the real poles of R(x).
U_SHIFT = 0.5
V_SHIFT = -0.3


def as_complex(pair: Sequence[float]) -> complex:
    return complex(pair[0], pair[1])


def as_pair(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def draw_inhomogeneities(rng: np.random.Generator, count: int, low: float = -1.0,
                         high: float = 1.0, min_gap: float = 0.1) -> List[float]:
    """Sorted real points in [low, high] with pairwise gaps of at least min_gap."""
    while True:
        points = np.sort(rng.uniform(low, high, count))
        if count < 2 or np.min(np.diff(points)) >= min_gap:
            return [float(p) for p in points]


def draw_spectral(rng: np.random.Generator, shift: float) -> List[float]:
    return [float(rng.uniform(-2.0, 2.0)), shift]


class YangBaxterCheck(Check):
    """R12 R13 R23 = R23 R13 R12 on seeded spectral triples."""

    tolerance = 1e-11

    @property
    def name(self) -> str:
        return "ybe"

    @property
    def description(self) -> str:
        return "Yang-Baxter equation for the spectral R-matrix"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        cases = []
        for n in sorted({2, self.config.sizes.rank}):
            triples = [
                [[float(rng.uniform(-2, 2)), offset] for offset in (0.0, 0.4, 0.9)]
                for _ in range(self.config.draws)
            ]
            cases.append({"n": n, "triples": triples})
        return cases

    def evaluate(self, executor=None, n: int = 2, triples=()) -> Outcome:
        params = self.config.to_params(n)
        worst = 0.0
        for triple in triples:
            x1, x2, x3 = (as_complex(t) for t in triple)
            worst = max(worst, ybe_residual(x1, x2, x3, params))
        return Outcome(residuals={"ybe": worst}, work={"triples": len(triples)})


class ExchangeCheck(Check):
    """TT and TQ exchange relations in two auxiliary spaces."""

    tolerance = 1e-10

    @property
    def name(self) -> str:
        return "exchange"

    @property
    def description(self) -> str:
        return "Exchange relations of doubled and shifted monodromies"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        cases = []
        for N in self.config.sizes.sites:
            draws = []
            for _ in range(self.config.draws):
                draws.append({
                    "x": draw_inhomogeneities(rng, N),
                    "u": draw_spectral(rng, U_SHIFT),
                    "v": draw_spectral(rng, V_SHIFT),
                    "i": int(rng.integers(1, N + 1)),
                })
            cases.append({"n": self.config.sizes.rank, "N": N, "draws": draws})
        return cases

    def evaluate(self, executor=None, n: int = 2, N: int = 1, draws=()) -> Outcome:
        params = self.config.to_params(n)
        worst = {kind: 0.0 for kind in EXCHANGE_KINDS}
        printed = 0.0
        for d in draws:
            u, v = as_complex(d["u"]), as_complex(d["v"])
            worst["TT"] = max(worst["TT"], exchange_residual("TT", d["x"], params, u, v))
            worst["TQ"] = max(worst["TQ"], exchange_residual("TQ", d["x"], params, u, i=d["i"]))
            printed = max(printed, exchange_residual("TT", d["x"], params, u, v, variant="printed"))
        return Outcome(
            residuals=worst,
            observations={"TT_printed_middle": printed},
            work={"draws": len(draws)},
            notes=["TT_printed_middle carries the constant R_ba in both middles"],
        )


class CommutationCheck(Check):
    """Block relations between A, B, D and their shifted counterparts."""

    tolerance = 1e-10
    max_draws = 5

    @property
    def name(self) -> str:
        return "commutation"

    @property
    def description(self) -> str:
        return "Commutation relations between monodromy blocks"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        cases = []
        for N in self.config.sizes.sites:
            for _ in range(min(self.config.draws, self.max_draws)):
                cases.append({
                    "n": self.config.sizes.rank,
                    "x": draw_inhomogeneities(rng, N),
                    "u": draw_spectral(rng, U_SHIFT),
                    "v": draw_spectral(rng, V_SHIFT),
                    "i": int(rng.integers(1, N + 1)),
                    "batch_seed": int(rng.integers(0, 2**31)),
                })
        return cases

    def evaluate(self, executor=None, n: int = 2, x=(), u=(0.0, 0.0), v=(0.0, 0.0), i: int = 1,
                 batch_seed: int = 0) -> Outcome:
        params = self.config.to_params(n)
        results = commutation_residuals(x, params, as_complex(u), as_complex(v), i,
                                        seed=batch_seed)
        outcome = Outcome(work={"relations": len(results)})
        for r in results:
            if r.expectation == "holds":
                outcome.residuals[r.relation] = r.residual
            elif r.expectation == "fails":
                outcome.expected_failures[r.relation] = r.residual
            else:
                outcome.observations[r.relation] = r.residual
        if outcome.observations:
            outcome.notes.append(
                "reported, not gated: "
                + ", ".join(sorted(outcome.observations))
            )
        return outcome


class VacuumCheck(Check):
    """Action of the doubled and shifted monodromies on the reference state."""

    tolerance = 1e-11

    @property
    def name(self) -> str:
        return "vacuum"

    @property
    def description(self) -> str:
        return "Reference-state eigenvalues of A, C, D, A^Q, D^Q and Q"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        return [
            {"n": self.config.sizes.rank, "x": draw_inhomogeneities(rng, N),
             "u": draw_spectral(rng, U_SHIFT)}
            for N in self.config.sizes.sites
            for _ in range(min(self.config.draws, 10))
        ]

    def evaluate(self, executor=None, n: int = 2, x=(), u=(0.0, 0.0)) -> Outcome:
        params = self.config.to_params(n)
        report = vacuum_actions(x, as_complex(u), params)
        d_scale = max(1.0, abs(report.d_predicted))
        return Outcome(
            residuals={
                "a_omega": report.a_residual,
                "c_omega": report.c_norm,
                "d_parallel": report.d_parallel_residual,
                "d_eigenvalue": abs(report.d_eigenvalue - report.d_predicted) / d_scale,
                "aq_omega": max(report.aq_residuals),
                "dq_omega": max(report.dq_norms),
                "q_omega": max(report.q_residuals),
            },
            observations={"d_eigenvalue": report.d_eigenvalue},
        )


class ScalarCheck(Check):
    """psi and tau difference equations, q-Pochhammer and Boltzmann oracles."""

    tolerance = 1e-9
    oracle_tolerance = 1e-13
    antisymmetry_tolerance = 1e-12

    @property
    def name(self) -> str:
        return "scalar"

    @property
    def description(self) -> str:
        return "Scalar difference equations and 50-digit oracles"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        points = [
            [float(rng.uniform(-3, 3)), float(rng.uniform(0.3, 1.0))]
            for _ in range(5 * self.config.draws)
        ]
        return [{"points": points}]

    def evaluate(self, executor=None, points=()) -> Outcome:
        params = self.config.to_params(2)
        policy = self.config.to_policy()
        psi_worst = tau_worst = anti_worst = 0.0
        poch_worst = boltz_worst = 0.0
        for pair in points:
            y = as_complex(pair)
            r_psi, r_tau = scalar_equation_residuals(y, params, policy)
            psi_worst = max(psi_worst, r_psi)
            tau_worst = max(tau_worst, r_tau)
            anti_worst = max(anti_worst, antisymmetry_residual(y, params))
            z = np.exp(y)
            oracle = qpochhammer_mp(z, params.p)
            poch_worst = max(poch_worst, abs(qpochhammer(z, params.p, policy).value - oracle)
                             / abs(oracle))
            w, w_mp = boltzmann(y, params), boltzmann_mp(y, params)
            boltz_worst = max(
                boltz_worst,
                abs(w.b - w_mp.b), abs(w.c_plus - w_mp.c_plus), abs(w.c_minus - w_mp.c_minus),
            )
        return Outcome(
            residuals={
                "psi_equation": psi_worst,
                "tau_equation": tau_worst,
                "antisymmetry": anti_worst,
                "qpochhammer_oracle": poch_worst,
                "boltzmann_oracle": boltz_worst,
            },
            work={"points": len(points)},
            tolerances={
                "qpochhammer_oracle": self.oracle_tolerance,
                "boltzmann_oracle": self.oracle_tolerance,
                "antisymmetry": self.antisymmetry_tolerance,
            },
        )
