"""Checks for Bethe vectors, their symmetry and the nested construction."""

from typing import Any, Dict, List

import numpy as np

from ..algebra.bethe import (
    VANISHING_RATIO,
    anchored_spec,
    bethe_vector,
    difference_report,
    unwanted_telescoping,
)
from ..algebra.nested import (
    anchored_nested_spec,
    nested_bethe_vector,
    nested_difference_report,
    nested_highest_weight_residual,
    nested_weight_of,
)
from ..algebra.symmetry import (
    doubled_highest_weight_residual,
    generators,
    highest_weight_residual,
    mode_agreement,
    q_commutation_exponent,
    support_grades,
    weight_of,
)
from ..algebra.tensorspace import StateVector
from .algebra_checks import draw_inhomogeneities
from .base import Check, Outcome

# Wider gaps than the algebra checks keep the anchored lattices well apart.
BETHE_GAP = 0.2
# Q Omega = Omega holds to rounding.
REFERENCE_TOLERANCE = 1e-13
# Vanishing vectors are measured against their largest lattice term.
MASS_TOLERANCE = 1e-6


def _bethe_cases(check: Check, rng: np.random.Generator) -> List[Dict[str, Any]]:
    cases = []
    for N in check.config.sizes.sites:
        for m in check.config.sizes.particles:
            if m > N:
                continue
            cases.append({
                "x": draw_inhomogeneities(rng, N, min_gap=BETHE_GAP),
                "anchors": list(range(1, m + 1)),
            })
    return cases


def _anchored(check: Check, x, anchors):
    return anchored_spec(
        x, anchors, check.config.to_params(2), check.config.to_policy(),
        allow_outside_window=check.config.params.allow_outside_window,
    )


class BetheCheck(Check):
    """
    Q(x; i) f(x) = f(x') at every site for anchored Bethe vectors.

    m = 0 is gated at rounding level. For m > N/2 the vector vanishes; its
    residual is gated relative to the largest lattice term, next to |f| itself.
    """

    tolerance = 1e-6

    @property
    def name(self) -> str:
        return "bethe"

    @property
    def description(self) -> str:
        return "Difference equation for U_q[sl(2)] Bethe vectors"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        return _bethe_cases(self, rng)

    def evaluate(self, executor=None, x=(), anchors=()) -> Outcome:
        spec = _anchored(self, x, anchors)
        vanishing = spec.vanishing_expected
        outcome = Outcome()
        shells: Dict[str, List[int]] = {}
        converged = True
        for i in range(1, spec.N + 1):
            report = difference_report(spec, i, executor, allow_vanishing=vanishing)
            shells[f"site_{i}"] = list(report.shells)
            converged = converged and report.converged
            key = f"site_{i}"
            if vanishing:
                outcome.residuals[f"{key}_mass"] = report.mass_residual
                outcome.observations[key] = report.residual
            else:
                outcome.residuals[key] = report.residual
                if spec.m == 0:
                    outcome.tolerances[key] = REFERENCE_TOLERANCE
        if vanishing:
            result = bethe_vector(spec, executor)
            outcome.residuals["relative_norm"] = result.relative_norm
            outcome.tolerances["relative_norm"] = VANISHING_RATIO
            outcome.notes.append(f"m={spec.m} exceeds N/2: the vector vanishes")
        outcome.work = {"shells": shells, "converged": converged, "N": spec.N, "m": spec.m}
        if not converged:
            outcome.notes.append("at least one lattice sum did not converge")
        return outcome


class UnwantedCheck(Check):
    """Telescoping of the unwanted coefficients along the top lattice line."""

    tolerance = 1e-8
    partial_sum_tolerance = 1e-6

    @property
    def name(self) -> str:
        return "unwanted"

    @property
    def description(self) -> str:
        return "Cancellation of unwanted terms between neighbouring lattice points"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        cases = []
        for N in self.config.sizes.sites:
            x = draw_inhomogeneities(rng, N, min_gap=BETHE_GAP)
            cases.extend({"x": x, "anchors": [1], "site": i} for i in range(1, N + 1))
        return cases

    def evaluate(self, executor=None, x=(), anchors=(), site: int = 1) -> Outcome:
        spec = _anchored(self, x, anchors)
        report = unwanted_telescoping(spec, site)
        if report is None:
            return Outcome(notes=["no unwanted terms for m=0"])
        return Outcome(
            residuals={
                "ratio_error": report.worst_ratio_error,
                "relative_partial_sum": report.relative_partial_sum,
                "relative_boundary": report.relative_boundary,
            },
            observations={"max_term": report.max_term},
            work={"ratios": len(report.ratios), "levels": len(report.levels)},
            tolerances={
                "relative_partial_sum": self.partial_sum_tolerance,
                "relative_boundary": self.partial_sum_tolerance,
            },
        )


class HighestWeightCheck(Check):
    """J_+ annihilates Bethe vectors; a generic state is a negative control."""

    tolerance = 1e-9

    @property
    def name(self) -> str:
        return "highest-weight"

    @property
    def description(self) -> str:
        return "Highest-weight property of Bethe vectors"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        cases = _bethe_cases(self, rng)
        for case in cases:
            case["control_seed"] = int(rng.integers(0, 2**31))
        return cases

    def evaluate(self, executor=None, x=(), anchors=(), control_seed: int = 0) -> Outcome:
        spec = _anchored(self, x, anchors)
        params = spec.params
        result = bethe_vector(spec, executor)
        gens = generators(spec.x, params)
        outcome = Outcome(work={"shells": result.shells_used, "converged": result.converged})

        generator_residual = highest_weight_residual(result.state, gens)
        if spec.vanishing_expected:
            outcome.residuals["generator_mass"] = (
                generator_residual * result.state.norm() / result.max_term_norm
            )
            outcome.tolerances["generator_mass"] = MASS_TOLERANCE
            outcome.observations["generator"] = generator_residual
        else:
            outcome.residuals["generator"] = generator_residual
        outcome.observations["doubled_monodromy"] = doubled_highest_weight_residual(
            result.state, spec.x, params
        )

        rng = np.random.default_rng(control_seed)
        dim = spec.shape.dim
        control = StateVector(spec.shape, rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
        outcome.expected_failures["negative_control"] = highest_weight_residual(control, gens)
        return outcome


class WeightsCheck(Check):
    """q^W_alpha eigenvalues of Bethe vectors equal (N - m, m)."""

    tolerance = 0.0

    @property
    def name(self) -> str:
        return "weights"

    @property
    def description(self) -> str:
        return "Weights and grading of Bethe vectors"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        return _bethe_cases(self, rng)

    def evaluate(self, executor=None, x=(), anchors=()) -> Outcome:
        spec = _anchored(self, x, anchors)
        result = bethe_vector(spec, executor)
        gens = generators(spec.x, spec.params, "closed_form")
        weight = weight_of(result.state, gens)
        expected = (spec.N - spec.m, spec.m)
        grades = support_grades(result.state)
        return Outcome(
            residuals={
                "weight_mismatch": float(sum(abs(a - b) for a, b in zip(weight.omega, expected))),
                "extra_grades": float(len(grades) - 1),
            },
            observations={"weight": list(weight.omega), "dominant": weight.is_dominant()},
            work={"shells": result.shells_used},
        )


class GeneratorsCheck(Check):
    """Numeric generator limits against the closed forms, and the q-commutation exponent."""

    tolerance = 1e-9

    @property
    def name(self) -> str:
        return "generators"

    @property
    def description(self) -> str:
        return "Quantum-group generators from the monodromy limits"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        return [{"x": draw_inhomogeneities(rng, N)} for N in self.config.sizes.sites]

    def evaluate(self, executor=None, x=()) -> Outcome:
        params = self.config.to_params(2)
        gens = generators(x, params)
        c, residual = q_commutation_exponent(gens)
        return Outcome(
            residuals={
                "mode_agreement": mode_agreement(x, params),
                "q_commutation": residual,
                "exponent_mismatch": float(abs(c - 1)),
            },
            observations={"exponent": c},
        )


class NestedCheck(Check):
    """
    Nested U_q[sl(n)] vectors.

    Gated: the rank-2 reduction, grading, the weight fixed by the level sizes, the
    raising blocks of T_0(x; +inf) and the difference equation at site 1.
    """

    tolerance = 1e-13
    weight_tolerance = 0.0
    highest_weight_tolerance = 1e-8
    difference_tolerance = 1e-4

    @property
    def name(self) -> str:
        return "nested"

    @property
    def description(self) -> str:
        return "Nested Bethe vectors for U_q[sl(n)]"

    def cases(self, rng: np.random.Generator) -> List[Dict[str, Any]]:
        cases: List[Dict[str, Any]] = [
            {"kind": "rank2", "x": draw_inhomogeneities(rng, 2, min_gap=BETHE_GAP)}
        ]
        for levels in self.config.sizes.levels:
            cases.append({
                "kind": "levels",
                "levels": list(levels),
                "x": draw_inhomogeneities(rng, levels[0], min_gap=BETHE_GAP),
            })
        return cases

    def evaluate(self, executor=None, kind: str = "levels", x=(), levels=()) -> Outcome:
        if kind == "rank2":
            return self._rank2(x, executor)
        return self._levels(x, levels, executor)

    def _rank2(self, x, executor) -> Outcome:
        params = self.config.to_params(2)
        policy = self.config.to_policy()
        allow = self.config.params.allow_outside_window
        plain = bethe_vector(anchored_spec(x, [1], params, policy, allow_outside_window=allow),
                             executor)
        nested = nested_bethe_vector(
            anchored_nested_spec(x, (2, 1), [1], [], params, policy, allow_outside_window=allow),
            executor,
        )
        diff = np.max(np.abs(plain.state.amplitudes - nested.state.amplitudes))
        scale = max(1.0, float(np.max(np.abs(plain.state.amplitudes))))
        return Outcome(
            residuals={"rank2_reduction": float(diff) / scale},
            work={"shells": [plain.shells_used, nested.shells_used]},
        )

    def _levels(self, x, levels, executor) -> Outcome:
        n = len(levels)
        params = self.config.to_params(n)
        spec = anchored_nested_spec(
            x, levels, top_anchors(levels[0], levels[1]),
            [list(range(1, size + 1)) for size in levels[2:]],
            params, self.config.to_policy(),
            allow_outside_window=self.config.params.allow_outside_window,
        )
        result = nested_bethe_vector(spec, executor)
        weight = nested_weight_of(result.state, spec)
        grades = support_grades(result.state)
        report = nested_difference_report(spec, 1, executor)
        return Outcome(
            residuals={
                "extra_grades": float(len(grades) - 1),
                "weight_mismatch": float(sum(
                    abs(a - b) for a, b in zip(weight.omega, spec.weight.omega)
                )),
                "highest_weight": nested_highest_weight_residual(result.state, spec),
                "difference": report.residual,
            },
            observations={"weight": list(weight.omega), "dominant": weight.is_dominant(),
                          "difference_mass": report.mass_residual},
            work={"shells": result.shells_used, "terms": result.terms_used,
                  "converged": result.converged and report.converged},
            tolerances={
                "weight_mismatch": self.weight_tolerance,
                "highest_weight": self.highest_weight_tolerance,
                "difference": self.difference_tolerance,
            },
        )


def top_anchors(N: int, M: int) -> List[int]:
    """Even sites first, then odd ones: anchored top roots kept apart."""
    order = list(range(2, N + 1, 2)) + list(range(1, N + 1, 2))
    return order[:M]
