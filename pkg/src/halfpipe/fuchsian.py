"""Fuchsian punctured-torus groups, multicurves, and leaf enumeration.

The base hyperbolic structure is a once-punctured torus, described by trace
coordinates (x, y, z) = (tr A, tr B, tr AB) of a pair of SL(2, R) generators,
subject to the Fricke relation x^2 + y^2 + z^2 = xyz (equivalent to the
commutator [A, B] being parabolic of trace -2, i.e. a cusp).  Holonomies act
on H2 through the adjoint representation SL(2, R) -> SO0(1, 2) on trace-free
2x2 matrices with the Minkowski norm -det.

A weighted multicurve is a finite set of non-peripheral simple closed curves
with positive weights.  Its preimage in H2 is a disjoint union of complete
geodesics (leaves); the walk below enumerates all leaves near a queried
segment by expanding reduced words of the free group in depth shells with a
distance prune, so that crossing queries against compact segments are
complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from halfpipe.geometry import (
    J3,
    GeometryError,
    SpacelikeGeodesicH2,
    disk_lift,
    minkowski_dot,
)

# |x^2 + y^2 + z^2 - xyz| accepted as "on the relation variety".
EPS_FRICKE = 1e-9
# Pairings below this flag a segment endpoint as lying on a leaf.
EPS_ENDPOINT = 1e-9

GENERATOR_LETTERS = "ABab"


class BadTracesError(GeometryError):
    """Trace coordinates violate the cusped punctured-torus constraints."""


class NotHyperbolicError(GeometryError):
    """A group element expected to be hyperbolic is not."""


class BadWordError(GeometryError):
    """A curve word uses letters outside A, B, a, b or is empty."""


class EndpointOnLeafError(GeometryError):
    """A segment endpoint lies on a leaf of the multicurve preimage."""


class EnumerationBudgetError(GeometryError):
    """Leaf enumeration hit its node or depth budget before completing."""


class NoConvergenceError(GeometryError):
    """The length minimization did not reach the requested tolerance."""


# ---------------------------------------------------------------------------
# Words in the free group on A, B.
# ---------------------------------------------------------------------------


def _check_word(word: str) -> str:
    if not word or any(ch not in GENERATOR_LETTERS for ch in word):
        raise BadWordError(f"curve words are nonempty strings over A, B, a, b; got {word!r}")
    return word


def invert_word(word: str) -> str:
    if not word:
        return ""
    return _check_word(word)[::-1].swapcase()


def free_reduce(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def _cyclic_reduce(word: str) -> str:
    w = free_reduce(word)
    while len(w) > 1 and w[0] == w[-1].swapcase():
        w = w[1:-1]
    return w


def words_conjugate(w1: str, w2: str) -> bool:
    """Whether two words are conjugate in the free group (cyclic equality)."""
    a, b = _cyclic_reduce(w1), _cyclic_reduce(w2)
    if len(a) != len(b):
        return False
    return b in (a + a) if a else b == ""


def word_homology(word: str) -> tuple[int, int]:
    """Exponent sums (over A and over B) of a word."""
    _check_word(word)
    return (
        word.count("A") - word.count("a"),
        word.count("B") - word.count("b"),
    )


# ---------------------------------------------------------------------------
# SL(2, R) and its adjoint action on Minkowski R^{1,2}.
# ---------------------------------------------------------------------------

_SL2_BASIS = (
    np.array([[0.0, -1.0], [1.0, 0.0]]),
    np.array([[1.0, 0.0], [0.0, -1.0]]),
    np.array([[0.0, 1.0], [1.0, 0.0]]),
)


def _traceless_coords(m: np.ndarray) -> np.ndarray:
    return np.array([(m[1, 0] - m[0, 1]) / 2.0, m[0, 0], (m[1, 0] + m[0, 1]) / 2.0])


def sl2_to_so12(g: np.ndarray) -> np.ndarray:
    """Adjoint image of g in SO0(1,2), acting on trace-free matrices.

    Coordinates are chosen so that -det of a trace-free matrix is the
    Minkowski norm; the map is a 2-to-1 homomorphism with sl2_to_so12(-g) =
    sl2_to_so12(g).
    """
    g = np.asarray(g, dtype=float)
    g_inv = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
    return np.column_stack([_traceless_coords(g @ e @ g_inv) for e in _SL2_BASIS])


def sl2_classify(g: np.ndarray, tol: float = 1e-9) -> str:
    tr = abs(float(np.trace(g)))
    if abs(tr - 2.0) <= tol:
        return "parabolic"
    return "hyperbolic" if tr > 2.0 else "elliptic"


def translation_length_sl2(g: np.ndarray) -> float:
    """2 arccosh(|tr|/2) for hyperbolic elements, 0 otherwise."""
    half = abs(float(np.trace(g))) / 2.0
    return 2.0 * math.acosh(half) if half > 1.0 else 0.0


def axis_of_sl2(g: np.ndarray, tol: float = 1e-9) -> SpacelikeGeodesicH2:
    """The oriented axis of a hyperbolic element, repelling to attracting.

    The normal is the suitably scaled trace-free part of g; the left-normal
    convention makes the attracting ideal endpoint the forward one.
    """
    g = np.asarray(g, dtype=float)
    tr = float(np.trace(g))
    if abs(tr) <= 2.0 + tol:
        raise NotHyperbolicError(f"axis needs |trace| > 2; got {tr:.6f}")
    eta = _traceless_coords(g - (tr / 2.0) * np.eye(2))
    return SpacelikeGeodesicH2(eta * math.copysign(1.0, tr))


# ---------------------------------------------------------------------------
# Trace coordinates and the group normal form.
# ---------------------------------------------------------------------------


def fricke_defect(x: float, y: float, z: float) -> float:
    return x * x + y * y + z * z - x * y * z


@dataclass(frozen=True)
class TeichPoint:
    """Trace coordinates (x, y, z), all > 2, on the Fricke variety."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if min(self.x, self.y, self.z) <= 2.0:
            raise BadTracesError("trace coordinates must all exceed 2")
        defect = fricke_defect(self.x, self.y, self.z)
        if abs(defect) > EPS_FRICKE:
            raise BadTracesError(f"trace relation violated (defect {defect:.3e})")

    @classmethod
    def from_xy(cls, x: float, y: float, branch: str = "minus") -> "TeichPoint":
        """Solve the trace relation for z; 'minus'/'plus' pick the two roots."""
        disc = x * x * y * y - 4.0 * (x * x + y * y)
        if disc < 0.0:
            raise BadTracesError("no real trace relation solution for these (x, y)")
        root = math.sqrt(disc)
        z = (x * y - root) / 2.0 if branch == "minus" else (x * y + root) / 2.0
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def _normal_form_generators(x: float, y: float, z: float) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic SL2 pair with traces (x, y, z): A diagonal, B[1,0] > 0."""
    lam = (x + math.sqrt(x * x - 4.0)) / 2.0
    gen_a = np.diag([lam, 1.0 / lam])
    p = (z - y / lam) / (lam - 1.0 / lam)
    s = y - p
    ps = p * s
    if ps >= 1.0:
        q = r = math.sqrt(ps - 1.0)
    else:
        r = math.sqrt(1.0 - ps)
        q = -r
    if r == 0.0:
        raise BadTracesError("generators are reducible; traces do not give a cusped torus")
    gen_b = np.array([[p, q], [r, s]])
    return gen_a, gen_b


@dataclass(frozen=True)
class PuncturedTorusGroup:
    """A cusped once-punctured-torus group in deterministic normal form.

    Words over the letters A, B (and inverses a, b) evaluate left-to-right to
    SL2 matrices, and through the adjoint to Lorentz matrices acting on the
    shared hyperbolic plane.  The commutator word is the cusp.
    """

    trace_point: TeichPoint

    CUSP_WORD = "ABab"

    def __post_init__(self) -> None:
        tp = self.trace_point
        gen_a, gen_b = _normal_form_generators(tp.x, tp.y, tp.z)
        object.__setattr__(self, "_sl2_gens", {"A": gen_a, "B": gen_b})

    def sl2(self, word: str) -> np.ndarray:
        if word:
            _check_word(word)
        out = np.eye(2)
        for ch in word:
            g = self._sl2_gens[ch.upper()]
            if ch.islower():
                g = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
            out = out @ g
        return out

    def lorentz(self, word: str) -> np.ndarray:
        return sl2_to_so12(self.sl2(word))

    def axis(self, word: str) -> SpacelikeGeodesicH2:
        return axis_of_sl2(self.sl2(word))

    def translation_length(self, word: str) -> float:
        return translation_length_sl2(self.sl2(word))

    def cusp_trace(self) -> float:
        return float(np.trace(self.sl2(self.CUSP_WORD)))

    def cache_key(self) -> tuple:
        tp = self.trace_point
        return (round(tp.x, 12), round(tp.y, 12), round(tp.z, 12))


def build_punctured_torus(tp: TeichPoint) -> PuncturedTorusGroup:
    """The normal-form group at a trace point (cusp trace -2 guaranteed)."""
    group = PuncturedTorusGroup(tp)
    if abs(group.cusp_trace() + 2.0) > 1e-9:
        raise BadTracesError("constructed group fails the cusp trace check")
    return group


# ---------------------------------------------------------------------------
# Weighted multicurves.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MulticurveComponent:
    word: str
    weight: float

    def __post_init__(self) -> None:
        _check_word(self.word)
        if free_reduce(self.word) != self.word:
            raise BadWordError(f"component word {self.word!r} is not freely reduced")
        if not self.weight > 0.0:
            raise BadWordError("component weights must be positive")


@dataclass(frozen=True)
class WeightedMulticurve:
    components: tuple[MulticurveComponent, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise BadWordError("a multicurve needs at least one component")
        for comp in comps:
            if words_conjugate(comp.word, PuncturedTorusGroup.CUSP_WORD) or words_conjugate(
                comp.word, invert_word(PuncturedTorusGroup.CUSP_WORD)
            ):
                raise BadWordError(f"component {comp.word!r} is peripheral")
        for i, ci in enumerate(comps):
            for cj in comps[i + 1 :]:
                if words_conjugate(ci.word, cj.word) or words_conjugate(ci.word, invert_word(cj.word)):
                    raise BadWordError(f"components {ci.word!r} and {cj.word!r} are the same curve")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, word: str, weight: float = 1.0) -> "WeightedMulticurve":
        return cls((MulticurveComponent(word, weight),))

    def scaled(self, factor: float) -> "WeightedMulticurve":
        return WeightedMulticurve(tuple(MulticurveComponent(c.word, factor * c.weight) for c in self.components))

    def cache_key(self) -> tuple:
        return tuple((c.word, round(c.weight, 14)) for c in self.components)


def multicurve_length(point_or_group: TeichPoint | PuncturedTorusGroup, mc: WeightedMulticurve) -> float:
    """Weighted total geodesic length of the multicurve."""
    group = point_or_group if isinstance(point_or_group, PuncturedTorusGroup) else build_punctured_torus(point_or_group)
    total = 0.0
    for comp in mc.components:
        length = group.translation_length(comp.word)
        if length == 0.0:
            raise NotHyperbolicError(f"component {comp.word!r} is not hyperbolic at this point")
        total += comp.weight * length
    return total


def filling_advisory(lam: WeightedMulticurve, mu: WeightedMulticurve) -> str | None:
    """Heuristic filling check via homological intersection numbers.

    Tests a fixed family of primitive homology classes against the combined
    support; positive homological pairing implies positive geometric
    intersection, so passing is evidence (not proof) that the pair fills.
    Returns None when the heuristic passes, else a diagnostic message.
    """
    classes = [c for comp in (*lam.components, *mu.components) for c in [word_homology(comp.word)]]
    if any(c == (0, 0) for c in classes):
        return "filling heuristic inconclusive: a component is null-homologous"
    candidates = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)]
    for cand in candidates:
        if all(cand[0] * c[1] - cand[1] * c[0] == 0 for c in classes):
            return f"filling heuristic failed: no component crosses the class {cand}"
    return None


# ---------------------------------------------------------------------------
# Leaf enumeration.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LeafCrossing:
    """One leaf of the lifted multicurve crossing an oriented disk segment.

    The leaf is oriented so that its left normal points away from the segment
    start; the parameter locates the crossing along the segment in (0, 1).
    """

    leaf: SpacelikeGeodesicH2
    weight: float
    parameter: float
    conjugator_word: str
    component_index: int


def _canonical_sign(v: np.ndarray) -> float:
    for value in reversed(v):
        if abs(value) > 1e-12:
            return math.copysign(1.0, value)
    return 1.0


def _leaf_key(normal: np.ndarray) -> tuple:
    # Scale-free key: unit normals of far leaves have entries of size
    # cosh(distance), so round significant digits, not absolute ones.
    scaled = normal / np.max(np.abs(normal))
    if _canonical_sign(scaled) < 0:
        scaled = -scaled
    return tuple(np.round(scaled, 7))


def _leaves_near_segment(
    group: PuncturedTorusGroup,
    mc: WeightedMulticurve,
    x: np.ndarray,
    y: np.ndarray,
    slack: float,
    max_nodes: int,
    max_depth: int,
) -> tuple[np.ndarray, np.ndarray, list[str], list[int]]:
    """Every leaf whose distance to the segment [x, y] is within reach.

    Walks reduced words of the free group in depth shells, pruning a branch
    once the orbit of x strays beyond the components' reach (axis offset plus
    half a translation length) plus a comeback slack from the segment.  The
    walk length is governed by the segment's length, not by its distance to
    any fixed center.  Completeness of the slack is validated empirically by
    the exhaustive-enumeration tests.
    """
    lift_x, lift_y = disk_lift(x), disk_lift(y)
    cosh_len = max(1.0, -float(minkowski_dot(lift_x, lift_y)))
    degenerate = cosh_len < 1.0 + 1e-14
    if not degenerate:
        sinh_len = math.sqrt(cosh_len * cosh_len - 1.0)
        chord = J3 @ np.cross(lift_x, lift_y)
        chord /= math.sqrt(float(minkowski_dot(chord, chord)))
        forward = J3 @ ((lift_y - cosh_len * lift_x) / sinh_len)
        backward = J3 @ ((lift_x - cosh_len * lift_y) / sinh_len)
        chord = J3 @ chord
    gens = np.stack([group.lorentz(ch) for ch in GENERATOR_LETTERS])
    axis_normals = [group.axis(comp.word).normal for comp in mc.components]
    reach = max(
        math.asinh(abs(float(minkowski_dot(n, lift_x)))) + 0.5 * group.translation_length(comp.word)
        for n, comp in zip(axis_normals, mc.components)
    )
    cosh_cutoff = math.cosh(reach + slack)

    normal_list: list[np.ndarray] = []
    weights: list[float] = []
    words: list[str] = []
    comps: list[int] = []
    seen: set[tuple] = set()

    mats = np.eye(3)[np.newaxis]
    shell_words = [""]
    last = np.array([-1])
    node_count = 0
    for depth in range(max_depth + 1):
        orbit = mats @ lift_x
        if degenerate:
            cosh_dist = -(orbit @ (J3 @ lift_x))
        else:
            along = orbit @ chord
            cosh_dist = np.where(
                (orbit @ forward >= 0.0) & (orbit @ backward >= 0.0),
                np.sqrt(1.0 + along * along),
                -np.maximum(orbit @ (J3 @ lift_x), orbit @ (J3 @ lift_y)),
            )
        kept = np.nonzero(cosh_dist <= cosh_cutoff)[0]
        if kept.size == 0:
            break
        if depth == max_depth:
            raise EnumerationBudgetError("leaf enumeration exceeded the word-length cap")
        node_count += kept.size
        if node_count > max_nodes:
            raise EnumerationBudgetError("leaf enumeration exceeded the node budget")
        mats = mats[kept]
        shell_words = [shell_words[i] for i in kept]
        last = last[kept]
        for idx, base_normal in enumerate(axis_normals):
            normals = mats @ base_normal
            for row, word in enumerate(shell_words):
                key = (idx, _leaf_key(normals[row]))
                if key in seen:
                    continue
                seen.add(key)
                vec = normals[row]
                normal_list.append(vec if _canonical_sign(vec) > 0 else -vec)
                weights.append(mc.components[idx].weight)
                words.append(word)
                comps.append(idx)
        next_mats, next_words, next_last = [], [], []
        for j in range(len(GENERATOR_LETTERS)):
            mask = last != (j + 2) % 4
            next_mats.append(mats[mask] @ gens[j])
            next_words.extend(w + GENERATOR_LETTERS[j] for w, ok in zip(shell_words, mask) if ok)
            next_last.append(np.full(int(mask.sum()), j))
        mats = np.concatenate(next_mats)
        shell_words = next_words
        last = np.concatenate(next_last)
    stacked = np.array(normal_list) if normal_list else np.zeros((0, 3))
    return stacked, np.array(weights), words, comps


_CROSSING_CACHE: dict[tuple, tuple[LeafCrossing, ...]] = {}


def leaves_crossing(
    group: PuncturedTorusGroup,
    mc: WeightedMulticurve,
    x: np.ndarray,
    y: np.ndarray,
    *,
    slack: float = 4.0,
    max_nodes: int = 400_000,
    max_depth: int = 64,
) -> list[LeafCrossing]:
    """All leaves of the lifted multicurve crossing the open segment (x, y).

    Returned in increasing order of crossing parameter, each leaf oriented
    with its left normal pointing away from x.  Raises EndpointOnLeafError
    when an endpoint is within tolerance of a leaf, and EnumerationBudgetError
    if completeness cannot be certified within the budget.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    y = np.asarray(y, dtype=float).reshape(2)
    key = (group.cache_key(), mc.cache_key(), tuple(np.round(x, 13)), tuple(np.round(y, 13)), slack)
    cached = _CROSSING_CACHE.get(key)
    if cached is not None:
        return list(cached)
    normals, weights, words, comps = _leaves_near_segment(group, mc, x, y, slack, max_nodes, max_depth)
    crossings: list[LeafCrossing] = []
    if normals.shape[0]:
        # Affine pairings are sign- and root-compatible with the lifted ones;
        # the lift rescaling only matters for the endpoint-distance tolerance.
        f0 = normals @ (J3 @ np.concatenate(([1.0], x)))
        f1 = normals @ (J3 @ np.concatenate(([1.0], y)))
        scale0 = 1.0 / math.sqrt(1.0 - float(x @ x))
        scale1 = 1.0 / math.sqrt(1.0 - float(y @ y))
        if np.any(np.abs(f0) * scale0 < EPS_ENDPOINT) or np.any(np.abs(f1) * scale1 < EPS_ENDPOINT):
            raise EndpointOnLeafError("segment endpoint lies on a leaf; nudge the basepoint")
        for i in np.nonzero(f0 * f1 < 0.0)[0]:
            normal = normals[i] if f0[i] < 0.0 else -normals[i]
            crossings.append(
                LeafCrossing(
                    leaf=SpacelikeGeodesicH2(normal),
                    weight=float(weights[i]),
                    parameter=float(f0[i] / (f0[i] - f1[i])),
                    conjugator_word=words[i],
                    component_index=comps[i],
                )
            )
        crossings.sort(key=lambda c: c.parameter)
    _CROSSING_CACHE[key] = tuple(crossings)
    return crossings


# ---------------------------------------------------------------------------
# Length minimization over the trace variety.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KerckhoffResult:
    point: TeichPoint
    objective: float
    gradient_norm: float
    hessian_condition: float
    advisory: str | None


def _project_to_variety(p: np.ndarray) -> np.ndarray:
    p = np.array(p, dtype=float)
    for _ in range(60):
        defect = fricke_defect(*p)
        if abs(defect) < 1e-13:
            break
        grad = _fricke_gradient(p)
        p -= defect * grad / float(grad @ grad)
    return p


def _fricke_gradient(p: np.ndarray) -> np.ndarray:
    x, y, z = p
    return np.array([2.0 * x - y * z, 2.0 * y - x * z, 2.0 * z - x * y])


def _word_traces_objective(lam: WeightedMulticurve, mu: WeightedMulticurve):
    comps = [*lam.components, *mu.components]

    def objective(p: np.ndarray) -> float:
        x, y, z = p
        if min(x, y, z) <= 2.0:
            return 1e6
        try:
            gen_a, gen_b = _normal_form_generators(x, y, z)
        except (BadTracesError, ValueError):
            return 1e6
        letters = {
            "A": gen_a,
            "B": gen_b,
            "a": np.array([[gen_a[1, 1], -gen_a[0, 1]], [-gen_a[1, 0], gen_a[0, 0]]]),
            "b": np.array([[gen_b[1, 1], -gen_b[0, 1]], [-gen_b[1, 0], gen_b[0, 0]]]),
        }
        total = 0.0
        for comp in comps:
            m = np.eye(2)
            for ch in comp.word:
                m = m @ letters[ch]
            half = abs(float(np.trace(m))) / 2.0
            if half <= 1.0 + 1e-12:
                return 1e6
            total += comp.weight * 2.0 * math.acosh(half)
        return total

    return objective


def _projected_gradient(f, p: np.ndarray, h: float = 1e-6) -> np.ndarray:
    grad = np.zeros(3)
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        grad[k] = (f(p + step) - f(p - step)) / (2.0 * h)
    n = _fricke_gradient(p)
    n = n / np.linalg.norm(n)
    return grad - float(grad @ n) * n


def _tangent_basis(p: np.ndarray) -> np.ndarray:
    n = _fricke_gradient(p)
    n = n / np.linalg.norm(n)
    seed = np.eye(3)[np.argmin(np.abs(n))]
    t1 = seed - float(seed @ n) * n
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return np.column_stack([t1, t2])


def _reduced_hessian_condition(f, p: np.ndarray, h: float = 1e-4) -> float:
    basis = _tangent_basis(p)

    def on_surface(uv: np.ndarray) -> float:
        return f(_project_to_variety(p + basis @ uv))

    hess = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            e_i, e_j = np.zeros(2), np.zeros(2)
            e_i[i], e_j[j] = h, h
            hess[i, j] = (
                on_surface(e_i + e_j) - on_surface(e_i - e_j) - on_surface(-e_i + e_j) + on_surface(-e_i - e_j)
            ) / (4.0 * h * h)
    hess = (hess + hess.T) / 2.0
    eigs = np.abs(np.linalg.eigvalsh(hess))
    if eigs.min() < 1e-12:
        return math.inf
    return float(eigs.max() / eigs.min())


def kerckhoff_point(
    lam: WeightedMulticurve,
    mu: WeightedMulticurve,
    init: TeichPoint,
    *,
    gradient_tol: float = 1e-7,
    max_restarts: int = 8,
) -> KerckhoffResult:
    """Minimize the combined multicurve length over the trace variety.

    Runs SLSQP with the trace relation as an equality constraint (the variety
    is smooth wherever the relation gradient is nonzero, so boundary-free),
    restarting with deterministic jitter until the gradient projected to the
    variety tangent plane is below ``gradient_tol``.

    Returns the minimizer with the projected gradient norm, the condition
    number of the reduced Hessian (a flatness diagnostic; the minimizer is
    unique in theory but may sit in a numerically flat valley), and the
    filling-heuristic advisory.
    """
    f = _word_traces_objective(lam, mu)
    constraint = {"type": "eq", "fun": lambda p: fricke_defect(*p), "jac": lambda p: _fricke_gradient(p)}
    bounds = [(2.0 + 1e-9, 80.0)] * 3
    rng = np.random.default_rng(12345)
    p0 = init.as_array()
    best: tuple[float, np.ndarray] | None = None
    for _ in range(max_restarts):
        result = minimize(
            f,
            p0,
            method="SLSQP",
            bounds=bounds,
            constraints=[constraint],
            options={"maxiter": 500, "ftol": 1e-14},
        )
        p = _project_to_variety(result.x)
        grad_norm = float(np.linalg.norm(_projected_gradient(f, p)))
        if best is None or f(p) < best[0]:
            best = (f(p), p)
        if grad_norm < gradient_tol:
            point = TeichPoint(*p)
            return KerckhoffResult(
                point=point,
                objective=f(p),
                gradient_norm=grad_norm,
                hessian_condition=_reduced_hessian_condition(f, p),
                advisory=filling_advisory(lam, mu),
            )
        p0 = _project_to_variety(best[1] + rng.normal(scale=1e-3, size=3))
    raise NoConvergenceError("length minimization did not reach the gradient tolerance")
