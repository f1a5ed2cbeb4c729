"""The eight density-ordering measures, each fit once and scored many times.

Roster (CLI token, orientation):

* ``m0-kde``       bivariate Gaussian-kernel density estimate (concentration)
* ``m0-npcop``     marginal KDEs times a transformation-KDE copula density (concentration)
* ``m0-pcop``      fitted parametric marginals times an AIC-selected copula density (concentration)
* ``m1``           summed Euclidean distance to the k nearest neighbors (sparsity)
* ``m2``           summed per-neighbor marginal-CDF distance ratios (concentration)
* ``m3-ecdf``      empirical probability of an eps-box around the point, over box area (concentration)
* ``m3-npcop``     eps-box probability from ECDF margins + nonparametric copula (concentration)
* ``m3-pcop``      eps-box probability from parametric margins + copula CDF (concentration)

Fitting is single-threaded; the returned state is immutable and its
``score`` method is pure, so one fitted measure can serve many workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special, stats

from . import copulas, distributions as dists
from .core import Orientation, Sample2D, ScoreVector

__all__ = [
    "MeasureSpec",
    "FittedMeasure",
    "MEASURE_KINDS",
    "M0_KDE",
    "M0_NPCOP",
    "M0_PCOP",
    "M1_KNN_EUCL",
    "M2_KNN_CDF",
    "M3_ECDF_RECT",
    "M3_NPCOP_RECT",
    "M3_PCOP_RECT",
    "UNBOUNDED",
    "SIMPLEX",
    "heuristic_k",
    "heuristic_eps",
    "fit_measure",
    "score_sample",
    "m0_pcop_from_models",
    "m3_pcop_from_models",
]

M0_KDE = "m0-kde"
M0_NPCOP = "m0-npcop"
M0_PCOP = "m0-pcop"
M1_KNN_EUCL = "m1"
M2_KNN_CDF = "m2"
M3_ECDF_RECT = "m3-ecdf"
M3_NPCOP_RECT = "m3-npcop"
M3_PCOP_RECT = "m3-pcop"

MEASURE_KINDS = (
    M0_KDE,
    M0_NPCOP,
    M0_PCOP,
    M1_KNN_EUCL,
    M2_KNN_CDF,
    M3_ECDF_RECT,
    M3_NPCOP_RECT,
    M3_PCOP_RECT,
)

UNBOUNDED = "unbounded"
SIMPLEX = "simplex"

_EPS_KINDS = (M3_ECDF_RECT, M3_NPCOP_RECT, M3_PCOP_RECT)
_K_KINDS = (M1_KNN_EUCL, M2_KNN_CDF)
_COP_KINDS = (M0_NPCOP, M0_PCOP, M3_NPCOP_RECT, M3_PCOP_RECT)
_MODEL_KINDS = (M0_NPCOP, M0_PCOP, M3_NPCOP_RECT, M3_PCOP_RECT)

_BLOCK_BUDGET = 4_000_000
_CDF_CLIP = 1e-12  # guard before evaluating a copula density/CDF at a parametric-CDF coordinate


@dataclass(frozen=True)
class MeasureSpec:
    """Declarative measure choice; unset hyperparameters are filled from the
    published heuristics at fit time."""

    kind: str
    k: int | None = None
    eps: float | None = None
    copula_candidates: tuple | None = None
    marginal_families: tuple | None = None
    support_class: str = UNBOUNDED

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.support_class not in (UNBOUNDED, SIMPLEX):
            raise ValueError(f"unknown support class {self.support_class!r}")
        if self.k is not None and self.kind not in _K_KINDS:
            raise ValueError(f"{self.kind} does not take k")
        if self.eps is not None and self.kind not in _EPS_KINDS:
            raise ValueError(f"{self.kind} does not take eps")
        if self.eps is not None and self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        if (self.copula_candidates or self.marginal_families) and self.kind not in _COP_KINDS:
            raise ValueError(f"{self.kind} takes no copula/marginal settings")


def heuristic_k(n: int) -> int:
    """Neighbor count rule round(sqrt(n/2)), never below 1."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return max(1, int(math.floor(math.sqrt(n / 2.0) + 0.5)))


def heuristic_eps(kind: str, n: int, support_class: str = UNBOUNDED) -> float:
    """Published box half-width rules per measure and support class."""
    if kind not in _EPS_KINDS:
        raise ValueError(f"{kind} is not an eps-based measure")
    if n < 2:
        raise ValueError("n must be >= 2")
    ln = math.log(n)
    if support_class == SIMPLEX:
        if kind == M3_ECDF_RECT:
            return 0.10
        if kind == M3_NPCOP_RECT:
            return math.exp(-1.22 - 0.23 * ln)
        return 0.02
    if kind == M3_ECDF_RECT:
        return math.exp(2.13 - 0.30 * ln)
    if kind == M3_NPCOP_RECT:
        return math.exp(1.74 - 0.26 * ln)
    return math.exp(1.60 - 0.41 * ln)


class FittedMeasure:
    """Fitted, scoreable state of one measure."""

    def __init__(self, spec: MeasureSpec, orientation: Orientation, state, hyperparams: dict, fitted_copula_family=None):
        self.spec = spec
        self.orientation = orientation
        self._state = state
        self.hyperparams = dict(hyperparams)
        self.fitted_copula_family = fitted_copula_family

    def score(self, points) -> np.ndarray:
        """Evaluate the measure at (m, 2) points; pure and deterministic."""
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = self._state.score(pts)
        return float(out[0]) if scalar else out

    def score_vector(self, sample: Sample2D) -> ScoreVector:
        return ScoreVector(self.score(sample.points), self.orientation)


def score_sample(fitted: FittedMeasure, sample: Sample2D) -> ScoreVector:
    return fitted.score_vector(sample)


# ---------------------------------------------------------------------------
# fitted states


class _KdeState:
    def __init__(self, pts: np.ndarray, h: float):
        self.pts = pts
        self.h = h

    def score(self, q: np.ndarray) -> np.ndarray:
        n = self.pts.shape[0]
        out = np.empty(q.shape[0])
        block = max(1, _BLOCK_BUDGET // n)
        inv2h2 = 1.0 / (2.0 * self.h * self.h)
        for i in range(0, q.shape[0], block):
            sl = slice(i, i + block)
            dx = q[sl, 0:1] - self.pts[:, 0]
            dy = q[sl, 1:2] - self.pts[:, 1]
            out[sl] = np.exp(-(dx * dx + dy * dy) * inv2h2).sum(axis=1)
        return out / (n * 2.0 * np.pi * self.h * self.h)


class _KnnEuclState:
    def __init__(self, pts: np.ndarray, k: int):
        self.pts = pts
        self.k = k

    def score(self, q: np.ndarray) -> np.ndarray:
        n = self.pts.shape[0]
        out = np.empty(q.shape[0])
        block = max(1, _BLOCK_BUDGET // n)
        for i in range(0, q.shape[0], block):
            sl = slice(i, i + block)
            dx = q[sl, 0:1] - self.pts[:, 0]
            dy = q[sl, 1:2] - self.pts[:, 1]
            d = np.sqrt(dx * dx + dy * dy)
            if self.k >= n:
                out[sl] = d.sum(axis=1)
            else:
                # the sum of the k smallest values is tie-invariant
                out[sl] = np.partition(d, self.k - 1, axis=1)[:, : self.k].sum(axis=1)
        return out


class _KnnCdfState:
    def __init__(self, pts: np.ndarray, k: int):
        self.pts = pts
        self.k = k
        self.sorted_cols = (np.sort(pts[:, 0]), np.sort(pts[:, 1]))
        n = pts.shape[0]
        # ECDF values of the sample points themselves
        self.f_pts = np.column_stack([
            np.searchsorted(self.sorted_cols[0], pts[:, 0], side="right") / n,
            np.searchsorted(self.sorted_cols[1], pts[:, 1], side="right") / n,
        ])

    def _ecdf(self, q: np.ndarray) -> np.ndarray:
        n = self.pts.shape[0]
        return np.column_stack([
            np.searchsorted(self.sorted_cols[0], q[:, 0], side="right") / n,
            np.searchsorted(self.sorted_cols[1], q[:, 1], side="right") / n,
        ])

    def score(self, q: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return np.zeros(q.shape[0])
        n = self.pts.shape[0]
        k = self.k
        fq = self._ecdf(q)
        out = np.empty(q.shape[0])
        block = max(1, _BLOCK_BUDGET // (2 * n))
        for i in range(0, q.shape[0], block):
            sl = slice(i, i + block)
            dx = q[sl, 0:1] - self.pts[:, 0]
            dy = q[sl, 1:2] - self.pts[:, 1]
            d = np.sqrt(dx * dx + dy * dy)
            # stable argsort: exact ties resolve to the lower sample index
            idx = np.argsort(d, axis=1, kind="stable")[:, 1:k]
            rows = np.arange(idx.shape[0])[:, None]
            dist = d[rows, idx]
            du = fq[sl][:, None, 0] - self.f_pts[idx, 0]
            dv = fq[sl][:, None, 1] - self.f_pts[idx, 1]
            dp = np.sqrt(du * du + dv * dv)
            with np.errstate(invalid="ignore", divide="ignore"):
                terms = np.where(dist > 0.0, dp / dist, 0.0)  # duplicate points contribute 0
            out[sl] = terms.sum(axis=1)
        return out


class _EcdfRectState:
    def __init__(self, pts: np.ndarray, eps: float):
        self.pts = pts
        self.eps = eps

    def score(self, q: np.ndarray) -> np.ndarray:
        n = self.pts.shape[0]
        eps = self.eps
        out = np.empty(q.shape[0])
        block = max(1, _BLOCK_BUDGET // n)
        for i in range(0, q.shape[0], block):
            sl = slice(i, i + block)
            in_x = (np.abs(q[sl, 0:1] - self.pts[:, 0]) <= eps)
            in_y = (np.abs(q[sl, 1:2] - self.pts[:, 1]) <= eps)
            out[sl] = np.count_nonzero(in_x & in_y, axis=1)
        return out / (n * 4.0 * eps * eps)


class _MarginalKde:
    """Univariate Gaussian KDE with the normal-scale bandwidth."""

    def __init__(self, col: np.ndarray):
        self.col = col
        sd = float(np.std(col, ddof=1))
        if sd <= 0:
            raise ValueError("degenerate sample: zero variance")
        self.h = (4.0 / 3.0) ** 0.2 * sd * col.size ** (-0.2)

    def pdf(self, t: np.ndarray) -> np.ndarray:
        n = self.col.size
        out = np.empty(t.size)
        block = max(1, _BLOCK_BUDGET // n)
        for i in range(0, t.size, block):
            sl = slice(i, i + block)
            z = (t[sl, None] - self.col) / self.h
            out[sl] = np.exp(-0.5 * z * z).sum(axis=1)
        return out / (n * self.h * math.sqrt(2.0 * math.pi))


class _EcdfTransform:
    """Maps data coordinates to pseudo-coordinates n/(n+1) * F_n, clamped to
    [1/(n+1), n/(n+1)] so the normal quantile stays finite; sample points
    with distinct coordinates land exactly on ranks/(n+1)."""

    def __init__(self, pts: np.ndarray):
        self.sorted_cols = (np.sort(pts[:, 0]), np.sort(pts[:, 1]))
        self.n = pts.shape[0]

    def u(self, q: np.ndarray) -> np.ndarray:
        n = self.n
        out = np.column_stack([
            np.searchsorted(self.sorted_cols[0], q[:, 0], side="right"),
            np.searchsorted(self.sorted_cols[1], q[:, 1], side="right"),
        ]) / (n + 1.0)
        return np.clip(out, 1.0 / (n + 1.0), n / (n + 1.0))

    def u_at(self, vals: np.ndarray, axis: int, clamp: bool) -> np.ndarray:
        n = self.n
        out = np.searchsorted(self.sorted_cols[axis], vals, side="right") / (n + 1.0)
        if clamp:
            out = np.clip(out, 1.0 / (n + 1.0), n / (n + 1.0))
        return out


class _NpCopDensityState:
    def __init__(self, pts: np.ndarray):
        self.transform = _EcdfTransform(pts)
        self.marg = (_MarginalKde(pts[:, 0]), _MarginalKde(pts[:, 1]))
        self.copfit = copulas.npcop_fit(copulas.pseudo_observations(pts))

    def score(self, q: np.ndarray) -> np.ndarray:
        u = self.transform.u(q)
        c = copulas.npcop_pdf(self.copfit, u[:, 0], u[:, 1])
        return c * self.marg[0].pdf(q[:, 0]) * self.marg[1].pdf(q[:, 1])


class _NpCopRectState:
    def __init__(self, pts: np.ndarray, eps: float):
        self.transform = _EcdfTransform(pts)
        self.copfit = copulas.npcop_fit(copulas.pseudo_observations(pts))
        self.eps = eps

    def score(self, q: np.ndarray) -> np.ndarray:
        eps = self.eps
        # plain ECDF bounds: 0 and 1 map to the infinite tails of the
        # transformed kernels inside npcop_rect_prob
        t = self.transform
        n = t.n
        u_lo = np.searchsorted(t.sorted_cols[0], q[:, 0] - eps, side="right") / n
        u_hi = np.searchsorted(t.sorted_cols[0], q[:, 0] + eps, side="right") / n
        v_lo = np.searchsorted(t.sorted_cols[1], q[:, 1] - eps, side="right") / n
        v_hi = np.searchsorted(t.sorted_cols[1], q[:, 1] + eps, side="right") / n
        prob = copulas.npcop_rect_prob(self.copfit, u_lo, u_hi, v_lo, v_hi)
        return prob / (4.0 * eps * eps)


class _PCopDensityState:
    def __init__(self, copula_model, marginals):
        self.copula = copula_model
        self.marginals = marginals

    def score(self, q: np.ndarray) -> np.ndarray:
        u = np.clip(dists.marginal_cdf(self.marginals[0], q[:, 0]), _CDF_CLIP, 1.0 - _CDF_CLIP)
        v = np.clip(dists.marginal_cdf(self.marginals[1], q[:, 1]), _CDF_CLIP, 1.0 - _CDF_CLIP)
        c = copulas.copula_pdf(self.copula, u, v)
        return c * dists.marginal_pdf(self.marginals[0], q[:, 0]) * dists.marginal_pdf(self.marginals[1], q[:, 1])


class _PCopRectState:
    def __init__(self, copula_model, marginals, eps: float):
        self.copula = copula_model
        self.marginals = marginals
        self.eps = eps

    def score(self, q: np.ndarray) -> np.ndarray:
        eps = self.eps
        m1, m2 = self.marginals
        u_lo = dists.marginal_cdf(m1, q[:, 0] - eps)
        u_hi = dists.marginal_cdf(m1, q[:, 0] + eps)
        v_lo = dists.marginal_cdf(m2, q[:, 1] - eps)
        v_hi = dists.marginal_cdf(m2, q[:, 1] + eps)
        c = self.copula
        prob = (
            copulas.copula_cdf(c, u_hi, v_hi)
            - copulas.copula_cdf(c, u_lo, v_hi)
            - copulas.copula_cdf(c, u_hi, v_lo)
            + copulas.copula_cdf(c, u_lo, v_lo)
        )
        return np.maximum(prob, 0.0) / (4.0 * eps * eps)


# ---------------------------------------------------------------------------
# fitting


def _fill_spec(spec: MeasureSpec, n: int) -> MeasureSpec:
    if spec.kind in _K_KINDS and spec.k is None:
        k = heuristic_k(n) if spec.kind == M1_KNN_EUCL else 30
        spec = replace(spec, k=k)
    if spec.kind in _EPS_KINDS and spec.eps is None:
        spec = replace(spec, eps=heuristic_eps(spec.kind, n, spec.support_class))
    return spec


def _copula_params(model) -> dict:
    """Fitted copula parameters for the audit trail."""
    if model.family == copulas.GAUSSIAN:
        return {"rho": model.rho}
    if model.family == copulas.STUDENT_T:
        return {"rho": model.rho, "nu": model.nu}
    if model.family in (copulas.FRANK, copulas.CLAYTON):
        return {"theta": model.theta}
    return {}


def _fit_parametric(sample: Sample2D, spec: MeasureSpec):
    families = spec.marginal_families
    if families is None:
        raise ValueError(f"{spec.kind} requires marginal_families")
    fits = [dists.fit_marginal_mle(sample.column(j), families[j]) for j in range(2)]
    marginals = (fits[0].model, fits[1].model)
    u = np.column_stack([
        dists.marginal_cdf(marginals[0], sample.column(0)),
        dists.marginal_cdf(marginals[1], sample.column(1)),
    ])
    u = np.clip(u, _CDF_CLIP, 1.0 - _CDF_CLIP)
    pseudo = copulas.PseudoObservations(u, "parametric_cdf")
    candidates = spec.copula_candidates or copulas.DEFAULT_CANDIDATES
    model, _table = copulas.select_copula_aic(pseudo, candidates)
    return model, marginals


def fit_measure(spec: MeasureSpec, sample: Sample2D) -> FittedMeasure:
    """Fit one measure to a sample, filling unset hyperparameters from the
    heuristics. Model-based kinds need n >= 20; k-based kinds need k <= n."""
    n = sample.n
    spec = _fill_spec(spec, n)
    if spec.kind in _MODEL_KINDS and n < 20:
        raise ValueError(f"{spec.kind} needs at least 20 points")
    if spec.kind in _K_KINDS and spec.k > n:
        raise ValueError(f"k={spec.k} exceeds sample size {n}")

    try:
        if spec.kind == M0_KDE:
            sds = np.std(sample.points, axis=0, ddof=1)
            sbar = float(sds.mean())
            if sbar <= 0:
                raise ValueError("degenerate sample: zero variance")
            # normal-scale rule (4/(d+2))^(1/(d+4)) n^(-1/(d+4)) sigma-bar; the
            # leading constant is exactly 1 for d = 2
            h = sbar * n ** (-1.0 / 6.0)
            return FittedMeasure(spec, Orientation.CONCENTRATION, _KdeState(sample.points, h), {"h": h})

        if spec.kind == M1_KNN_EUCL:
            return FittedMeasure(spec, Orientation.SPARSITY, _KnnEuclState(sample.points, spec.k), {"k": spec.k})

        if spec.kind == M2_KNN_CDF:
            return FittedMeasure(spec, Orientation.CONCENTRATION, _KnnCdfState(sample.points, spec.k), {"k": spec.k})

        if spec.kind == M3_ECDF_RECT:
            return FittedMeasure(
                spec, Orientation.CONCENTRATION, _EcdfRectState(sample.points, spec.eps), {"eps": spec.eps}
            )

        if spec.kind == M0_NPCOP:
            state = _NpCopDensityState(sample.points)
            hp = {"h1": state.copfit.h1, "h2": state.copfit.h2, "hm1": state.marg[0].h, "hm2": state.marg[1].h}
            return FittedMeasure(spec, Orientation.CONCENTRATION, state, hp)

        if spec.kind == M3_NPCOP_RECT:
            state = _NpCopRectState(sample.points, spec.eps)
            hp = {"eps": spec.eps, "h1": state.copfit.h1, "h2": state.copfit.h2}
            return FittedMeasure(spec, Orientation.CONCENTRATION, state, hp)

        if spec.kind == M0_PCOP:
            model, marginals = _fit_parametric(sample, spec)
            state = _PCopDensityState(model, marginals)
            return FittedMeasure(spec, Orientation.CONCENTRATION, state, _copula_params(model), model.family)

        if spec.kind == M3_PCOP_RECT:
            model, marginals = _fit_parametric(sample, spec)
            state = _PCopRectState(model, marginals, spec.eps)
            hp = {"eps": spec.eps, **_copula_params(model)}
            return FittedMeasure(spec, Orientation.CONCENTRATION, state, hp, model.family)
    except Exception as exc:
        raise RuntimeError(f"fitting measure {spec.kind} failed: {exc}") from exc

    raise ValueError(f"unknown measure kind {spec.kind!r}")


def m0_pcop_from_models(copula_model, marginals) -> FittedMeasure:
    """Density-product measure with exact (injected) models, no fitting."""
    spec = MeasureSpec(M0_PCOP)
    state = _PCopDensityState(copula_model, tuple(marginals))
    return FittedMeasure(spec, Orientation.CONCENTRATION, state, {}, copula_model.family)


def m3_pcop_from_models(copula_model, marginals, eps: float) -> FittedMeasure:
    """Box-probability measure with exact (injected) models, no fitting."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    spec = MeasureSpec(M3_PCOP_RECT, eps=eps)
    state = _PCopRectState(copula_model, tuple(marginals), eps)
    return FittedMeasure(spec, Orientation.CONCENTRATION, state, {"eps": eps}, copula_model.family)
