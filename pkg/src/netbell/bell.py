"""Nonlinear Bell functionals, closed-form maxima, and angle optimization.

For k independent parties the score is F = |I|^(1/k) + |J|^(1/k), bounded by
1 for all k-independent hidden-state models and by sqrt(2) for the quantum
strategies built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .independence import IndependenceCertificate
from .network import (
    GeneralizedEPR,
    GeneralizedGHZ,
    NetworkTopology,
    PauliCoefficientState,
    SchmidtBlockBipartite,
    Werner,
)
from .quantum import (
    build_partition,
    factor_constants,
    factorized_IJ,
    full_tensor_IJ,
    ij_from_constants,
)

SQRT2 = math.sqrt(2.0)
CLASSIFICATION_EPS = 1e-6
LEMMA_TOL = 1e-12


class ResourceFamilyError(ValueError):
    """The network's resources fall outside the requested closed-form family."""


def root_k(value: float, k: int) -> float:
    """|value|^(1/k) with the zero case short-circuited."""
    if value == 0.0:
        return 0.0
    return math.exp(math.log(abs(value)) / k)


@dataclass(frozen=True)
class BellEvaluation:
    I: float
    J: float
    k: int
    F: float
    classification: str
    provenance: str
    angles: tuple[float, ...] | None = None

    def to_json_dict(self) -> dict:
        out = {
            "I": self.I,
            "J": self.J,
            "k": self.k,
            "F": self.F,
            "classification": self.classification,
            "provenance": self.provenance,
        }
        if self.angles is not None:
            out["angles"] = list(self.angles)
        return out


def classify(f: float, eps: float = CLASSIFICATION_EPS) -> str:
    if abs(f - SQRT2) <= eps:
        return "maximal"
    if f > 1.0 + eps:
        return "violation"
    return "no-violation"


def bell_value(
    i_value: float,
    j_value: float,
    k: int,
    provenance: str = "closed-form",
    angles: tuple[float, ...] | None = None,
    eps: float = CLASSIFICATION_EPS,
) -> BellEvaluation:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    f = root_k(i_value, k) + root_k(j_value, k)
    return BellEvaluation(
        I=i_value, J=j_value, k=k, F=f, classification=classify(f, eps),
        provenance=provenance, angles=angles,
    )


def evaluate(
    net: NetworkTopology,
    cert: IndependenceCertificate,
    angles: tuple[float, ...] | None = None,
    mode: str = "factorized",
    dim_cap: int | None = None,
) -> BellEvaluation:
    """Quantum value of the inequality at the given (or default) angles."""
    if cert.k < 1:
        raise ValueError("a certificate with k >= 1 is required")
    if angles is None:
        angles = default_angles(net, cert)
    if mode == "factorized":
        i_value, j_value = factorized_IJ(net, cert, angles)
    elif mode == "full-tensor":
        i_value, j_value = full_tensor_IJ(net, cert, angles, dim_cap)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected factorized or full-tensor")
    return bell_value(i_value, j_value, cert.k, provenance=mode, angles=angles)


# ---------------------------------------------------------------------------
# Closed-form parameters and maxima
# ---------------------------------------------------------------------------


def _x_correlator(resource) -> float:
    """Coefficient of the all-x string: 2ab for pure blocks, scaled by noise."""
    if isinstance(resource, GeneralizedEPR):
        return 2.0 * resource.a * resource.b
    if isinstance(resource, SchmidtBlockBipartite):
        return 2.0 * resource.a * resource.b
    if isinstance(resource, GeneralizedGHZ):
        return 2.0 * resource.a_hat * resource.b_hat
    if isinstance(resource, Werner):
        return resource.visibility * _x_correlator(resource.base)
    if isinstance(resource, PauliCoefficientState):
        return resource.coefficient("x" * resource.arity)
    raise ResourceFamilyError(f"unsupported resource {type(resource).__name__}")


def _z_block_weight(resource) -> float:
    """a^2 + b^2 of the distinguished Schmidt block (1 except for tails)."""
    if isinstance(resource, SchmidtBlockBipartite):
        return resource.a**2 + resource.b**2
    return 1.0


def _visibility(resource) -> float:
    if isinstance(resource, Werner):
        return resource.visibility
    return 1.0


@dataclass(frozen=True)
class ClosedFormParams:
    """Per-party and remainder products entering the analytic bounds.

    gamma_i: z-block weights of party i's shared bipartite states;
    delta_i: all-x correlators of party i's shared states;
    gamma, delta: the same products over the unshared states;
    gamma0 = max gamma_i, delta0 = min delta_i.
    """

    gamma_i: tuple[float, ...]
    delta_i: tuple[float, ...]
    gamma: float
    delta: float

    @property
    def gamma0(self) -> float:
        return max(self.gamma_i)

    @property
    def delta0(self) -> float:
        return min(self.delta_i, key=abs)


def closed_form_params(net: NetworkTopology, cert: IndependenceCertificate) -> ClosedFormParams:
    partition = build_partition(net, cert)
    gamma_i = []
    delta_i = []
    for pp in partition.parties:
        g = 1.0
        d = 1.0
        for j in pp.shared_sources:
            resource = net.sources[j].resource
            g *= _z_block_weight(resource)
            d *= _x_correlator(resource)
        gamma_i.append(g)
        delta_i.append(d)
    gamma = 1.0
    delta = 1.0
    for j in partition.remainder_sources:
        resource = net.sources[j].resource
        gamma *= _z_block_weight(resource)
        delta *= _x_correlator(resource)
    return ClosedFormParams(tuple(gamma_i), tuple(delta_i), gamma, delta)


def _resource_kinds(net: NetworkTopology) -> set[str]:
    kinds = set()
    for source in net.sources:
        resource = source.resource
        if isinstance(resource, Werner):
            kinds.add("werner")
        elif isinstance(resource, PauliCoefficientState):
            kinds.add("pauli")
        elif isinstance(resource, SchmidtBlockBipartite):
            kinds.add("schmidt")
        elif isinstance(resource, GeneralizedEPR):
            kinds.add("epr")
        else:
            kinds.add("ghz")
    return kinds


def closed_form_max(
    net: NetworkTopology, cert: IndependenceCertificate
) -> tuple[float, tuple[float, ...]]:
    """Analytic violation value and the witnessing uniform angles.

    For networks of EPR/GHZ/Werner resources the value is the exact maximum;
    for Schmidt tails and Pauli coefficient states it is the achievable
    bound of the respective construction, possibly below the true optimum.
    """
    k = cert.k
    if k < 1:
        raise ValueError("a certificate with k >= 1 is required")
    kinds = _resource_kinds(net)
    if "pauli" in kinds:
        if kinds - {"pauli"}:
            raise ResourceFamilyError(
                "Pauli coefficient bounds require all sources in coefficient form"
            )
        p_x = 1.0
        p_z = 1.0
        for source in net.sources:
            resource = source.resource
            p_x *= resource.coefficient("x" * resource.arity)
            p_z *= resource.coefficient("z" * resource.arity)
        f = math.sqrt(root_k(p_x, k) ** 2 + root_k(p_z, k) ** 2)
        theta = math.atan2(root_k(abs(p_x), k), root_k(abs(p_z), k)) if f > 0 else 0.0
        return f, (theta,) * k
    if "schmidt" in kinds:
        if "werner" in kinds:
            raise ResourceFamilyError(
                "no closed form for Schmidt tails combined with Werner noise"
            )
        params = closed_form_params(net, cert)
        g0 = params.gamma0
        d0 = abs(params.delta0)
        rest = 1.0 - params.gamma + params.delta
        norm = math.sqrt(g0**2 + (d0 * rest) ** 2)
        if norm == 0.0:
            return 1.0, (0.0,) * k
        theta = math.acos(min(1.0, g0 / norm))
        return norm - g0 + 1.0, (theta,) * k
    # EPR/GHZ/Werner family: exact maximum.  Visibility enters only through
    # the prefactor, so the correlator product uses the pure base states.
    visibility = 1.0
    correlator = 1.0
    for source in net.sources:
        resource = source.resource
        visibility *= _visibility(resource)
        if isinstance(resource, Werner):
            resource = resource.base
        correlator *= _x_correlator(resource)
    c2k = root_k(correlator, k) ** 2
    f = root_k(visibility, k) * math.sqrt(1.0 + c2k)
    theta = math.acos(1.0 / math.sqrt(1.0 + c2k))
    return f, (theta,) * k


def default_angles(net: NetworkTopology, cert: IndependenceCertificate) -> tuple[float, ...]:
    try:
        _, angles = closed_form_max(net, cert)
        return angles
    except ResourceFamilyError:
        return (math.pi / 4,) * cert.k


# ---------------------------------------------------------------------------
# Angle optimization
# ---------------------------------------------------------------------------


def optimize_angles(
    net: NetworkTopology,
    cert: IndependenceCertificate,
    grid: int = 64,
) -> tuple[float, tuple[float, ...]]:
    """Grid search plus coordinate descent over theta in [0, pi/2]^k.

    The per-party factors are linear in cos(theta_i) and sin(theta_i), so
    three probe evaluations per party replace tensor computations entirely.
    """
    constants = factor_constants(net, cert)
    k = cert.k
    half_pi = math.pi / 2

    def score(angles: tuple[float, ...]) -> float:
        i_value, j_value = ij_from_constants(constants, angles)
        return root_k(i_value, k) + root_k(j_value, k)

    starts: list[tuple[float, ...]] = []
    for g in range(grid + 1):
        starts.append((half_pi * g / grid,) * k)
    try:
        _, witness = closed_form_max(net, cert)
        starts.append(witness)
    except ResourceFamilyError:
        pass

    best_angles = max(starts, key=score)
    best = score(best_angles)

    def refine_axis(angles: list[float], axis: int) -> float:
        lo, hi = 0.0, half_pi
        steps = 64
        for _ in range(6):
            values = [lo + (hi - lo) * t / steps for t in range(steps + 1)]
            scored = []
            for v in values:
                angles[axis] = v
                scored.append(score(tuple(angles)))
            pos = max(range(len(values)), key=scored.__getitem__)
            angles[axis] = values[pos]
            window = (hi - lo) / steps
            lo = max(0.0, values[pos] - window)
            hi = min(half_pi, values[pos] + window)
        return score(tuple(angles))

    angles = list(best_angles)
    for _ in range(50):
        previous = best
        for axis in range(k):
            value = refine_axis(angles, axis)
            if value > best:
                best = value
        if best - previous < 1e-9:
            break
    return best, tuple(angles)


# ---------------------------------------------------------------------------
# Visibility and noise conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VisibilityBound:
    product_bound: float
    per_state_bounds: tuple[float, ...]
    k_used: int

    def to_json_dict(self) -> dict:
        return {
            "productBound": self.product_bound,
            "perStateBounds": list(self.per_state_bounds),
            "kUsed": self.k_used,
        }


def critical_visibility(net: NetworkTopology, cert: IndependenceCertificate) -> VisibilityBound:
    """Violation threshold on the product of per-source visibilities.

    Correlations violate the bound 1 exactly when the product of visibilities
    exceeds 1/(1 + prod c^(2/k))^(k/2); each source also gets the bipartite
    reference bound 1/sqrt(1+c^2) for chain comparisons.
    """
    if cert.k < 1:
        raise ValueError("a certificate with k >= 1 is required")
    per_state = []
    correlator = 1.0
    for source in net.sources:
        resource = source.resource
        if isinstance(resource, Werner):
            resource = resource.base
        if not isinstance(resource, (GeneralizedEPR, GeneralizedGHZ)):
            raise ResourceFamilyError(
                f"source {source.id}: visibility bounds need EPR/GHZ or Werner resources"
            )
        c = _x_correlator(resource)
        correlator *= c
        per_state.append(1.0 / math.sqrt(1.0 + c * c))
    k = cert.k
    c2k = root_k(correlator, k) ** 2
    bound = 1.0 / (1.0 + c2k) ** (k / 2.0)
    return VisibilityBound(bound, tuple(per_state), k)


def noisy_sufficient(net: NetworkTopology, cert: IndependenceCertificate) -> dict:
    """Sufficient violation condition for Pauli-coefficient resources.

    satisfied iff prod(xx coefficients)^(2/k) + prod(zz)^(2/k) > 1; the
    report also carries the simpler all-coefficients >= sqrt(2)/2 test.
    """
    if cert.k < 1:
        raise ValueError("a certificate with k >= 1 is required")
    p_x = 1.0
    p_z = 1.0
    simple = True
    for source in net.sources:
        resource = source.resource
        if not isinstance(resource, PauliCoefficientState):
            raise ResourceFamilyError(
                f"source {source.id}: noisy condition needs Pauli coefficient states"
            )
        vx = resource.coefficient("x" * resource.arity)
        vz = resource.coefficient("z" * resource.arity)
        p_x *= vx
        p_z *= vz
        simple = simple and vx >= SQRT2 / 2 and vz >= SQRT2 / 2
    k = cert.k
    lhs = root_k(p_x, k) ** 2 + root_k(p_z, k) ** 2
    return {
        "satisfied": lhs > 1.0,
        "margin": lhs - 1.0,
        "simple_test": simple,
        "k": k,
    }


@dataclass(frozen=True)
class SmallThetaResult:
    evaluation: BellEvaluation
    threshold: float
    exceeded: bool  # whether F > 1 held at the exact evaluation


def small_theta_strategy(
    net: NetworkTopology, cert: IndependenceCertificate, theta: float
) -> SmallThetaResult:
    """Uniform small-angle strategy for partially known resources.

    Valid when theta is below 2*delta0*(1-gamma+delta); the linearized
    expansion predicts F > 1 there, and the exact value is returned.
    """
    params = closed_form_params(net, cert)
    if params.gamma - params.delta >= 1.0:
        raise ResourceFamilyError(
            "small-angle strategy needs gamma - delta < 1 (some entanglement "
            "must survive in every factor)"
        )
    threshold = 2.0 * abs(params.delta0) * (1.0 - params.gamma + params.delta)
    if not 0.0 <= theta < threshold:
        raise ValueError(
            f"theta {theta} outside [0, {threshold:.6g}), the small-angle window"
        )
    i_value, j_value = factorized_IJ(net, cert, (theta,) * cert.k)
    evaluation = bell_value(
        i_value, j_value, cert.k, provenance="factorized", angles=(theta,) * cert.k
    )
    return SmallThetaResult(evaluation, threshold, evaluation.F > 1.0)


def lemma1_check(thetas: list[float]) -> bool:
    """Geometric-mean sine inequality on [0, pi]."""
    if not thetas:
        raise ValueError("at least one angle required")
    for t in thetas:
        if not 0.0 <= t <= math.pi:
            raise ValueError(f"angle {t} outside [0, pi]")
    product = 1.0
    for t in thetas:
        product *= math.sin(t)
    lhs = root_k(product, len(thetas))
    return lhs <= math.sin(sum(thetas) / len(thetas)) + LEMMA_TOL
