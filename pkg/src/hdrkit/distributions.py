"""Univariate marginal families and bivariate elliptical CDF primitives.

Marginal families cover the four simulation schemes used by the scenario
grid: normal, standard Student-t, two-component normal mixture with a
shared variance, and the Beta(1, a+1) law that arises as the marginal of a
Dirichlet(1, 1, a) vector (CDF ``1 - (1-x)^(a+1)`` on [0, 1]).

Special functions (normal/t pdf, cdf, quantile) are delegated to scipy;
the bivariate normal and Student-t CDFs are evaluated with fixed-order
Gauss-Legendre reductions that are deterministic and vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

__all__ = [
    "MarginalModel",
    "FitReport",
    "normal",
    "student_t",
    "normal_mixture",
    "beta11a",
    "marginal_pdf",
    "marginal_cdf",
    "marginal_quantile",
    "fit_marginal_mle",
    "bvn_cdf",
    "bvt_cdf",
]

NORMAL = "normal"
STUDENT_T = "student_t"
NORMAL_MIXTURE = "normal_mixture"
BETA11A = "beta11a"

# profile-likelihood grid for t degrees of freedom (marginal fits)
NU_GRID = np.arange(1.0, 30.0 + 0.25, 0.5)


@dataclass(frozen=True)
class MarginalModel:
    """One univariate family plus its parameters.

    Use the module-level constructors (:func:`normal`, :func:`student_t`,
    :func:`normal_mixture`, :func:`beta11a`) rather than filling fields by
    hand; they validate the parameter domains.
    """

    family: str
    mu: float = 0.0
    sigma: float = 1.0
    nu: float = 1.0
    w: float = 0.5
    mu1: float = 0.0
    mu2: float = 0.0
    a: float = 1.0


def normal(mu: float, sigma: float) -> MarginalModel:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return MarginalModel(NORMAL, mu=float(mu), sigma=float(sigma))


def student_t(nu: float) -> MarginalModel:
    """Standard (location 0, scale 1) Student-t with ``nu`` degrees of freedom."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    return MarginalModel(STUDENT_T, nu=float(nu))


def normal_mixture(w: float, mu1: float, mu2: float, sigma: float) -> MarginalModel:
    """Two-component normal mixture ``w N(mu1, sigma^2) + (1-w) N(mu2, sigma^2)``."""
    if not 0.0 < w < 1.0:
        raise ValueError("w must be in (0, 1)")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return MarginalModel(NORMAL_MIXTURE, w=float(w), mu1=float(mu1), mu2=float(mu2), sigma=float(sigma))


def beta11a(a: float) -> MarginalModel:
    """Beta(1, a+1) marginal of a Dirichlet(1, 1, a) vector."""
    if a <= 0:
        raise ValueError("a must be positive")
    return MarginalModel(BETA11A, a=float(a))


@dataclass(frozen=True)
class FitReport:
    model: MarginalModel
    loglik: float
    iterations: int
    converged: bool


def marginal_pdf(m: MarginalModel, x):
    """Density of ``m`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if m.family == NORMAL:
        out = stats.norm.pdf(x, m.mu, m.sigma)
    elif m.family == STUDENT_T:
        out = stats.t.pdf(x, m.nu)
    elif m.family == NORMAL_MIXTURE:
        out = m.w * stats.norm.pdf(x, m.mu1, m.sigma) + (1.0 - m.w) * stats.norm.pdf(x, m.mu2, m.sigma)
    elif m.family == BETA11A:
        inside = (x >= 0.0) & (x <= 1.0)
        out = np.where(inside, (m.a + 1.0) * np.maximum(1.0 - x, 0.0) ** m.a, 0.0)
    else:
        raise ValueError(f"unknown family {m.family!r}")
    return float(out) if out.ndim == 0 else out


def marginal_cdf(m: MarginalModel, x):
    """CDF of ``m`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if m.family == NORMAL:
        out = special.ndtr((x - m.mu) / m.sigma)
    elif m.family == STUDENT_T:
        out = stats.t.cdf(x, m.nu)
    elif m.family == NORMAL_MIXTURE:
        out = m.w * special.ndtr((x - m.mu1) / m.sigma) + (1.0 - m.w) * special.ndtr((x - m.mu2) / m.sigma)
    elif m.family == BETA11A:
        xc = np.clip(x, 0.0, 1.0)
        out = 1.0 - (1.0 - xc) ** (m.a + 1.0)
    else:
        raise ValueError(f"unknown family {m.family!r}")
    return float(out) if out.ndim == 0 else out


def marginal_quantile(m: MarginalModel, p):
    """Inverse CDF of ``m`` at probability ``p`` in (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("quantile at boundary")
    if m.family == NORMAL:
        out = m.mu + m.sigma * special.ndtri(p)
    elif m.family == STUDENT_T:
        out = stats.t.ppf(p, m.nu)
    elif m.family == NORMAL_MIXTURE:
        out = _mixture_quantile(m, p)
    elif m.family == BETA11A:
        out = 1.0 - (1.0 - p) ** (1.0 / (m.a + 1.0))
    else:
        raise ValueError(f"unknown family {m.family!r}")
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def _mixture_quantile(m: MarginalModel, p: np.ndarray) -> np.ndarray:
    """Bracketed root-finding on the mixture CDF (monotone, smooth)."""
    scalar = p.ndim == 0
    pf = np.atleast_1d(p)
    lo_comp = min(m.mu1, m.mu2)
    hi_comp = max(m.mu1, m.mu2)
    z = special.ndtri(pf)
    lo = lo_comp + m.sigma * z - 1.0  # CDF(lo) <= p: both components shifted right of lo
    hi = hi_comp + m.sigma * z + 1.0
    out = np.empty_like(pf)
    for i, (pi, a, b) in enumerate(zip(pf, lo, hi)):
        out[i] = optimize.brentq(lambda x: marginal_cdf(m, x) - pi, a, b, xtol=1e-13, rtol=8.9e-16)
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# maximum likelihood fitting


def fit_marginal_mle(column, family: str) -> FitReport:
    """Fit one marginal family to a 1-D sample by maximum likelihood.

    Families follow the scenario generators: the normal fit is closed form,
    the t fit profiles nu over a fixed grid with location/scale pinned at
    (0, 1), the mixture fit runs EM with a shared sigma, and the Beta(1, a+1)
    fit has a closed-form MLE for ``a``.
    """
    x = np.asarray(column, dtype=float)
    if x.size < 10:
        raise ValueError("need at least 10 observations")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate sample: zero variance")

    if family == NORMAL:
        mu = float(np.mean(x))
        sigma = float(np.sqrt(np.mean((x - mu) ** 2)))
        model = normal(mu, sigma)
        ll = float(np.sum(stats.norm.logpdf(x, mu, sigma)))
        return FitReport(model, ll, 1, True)

    if family == STUDENT_T:
        lls = np.array([np.sum(stats.t.logpdf(x, nu)) for nu in NU_GRID])
        best = int(np.argmax(lls))
        return FitReport(student_t(float(NU_GRID[best])), float(lls[best]), len(NU_GRID), True)

    if family == NORMAL_MIXTURE:
        return _fit_mixture(x)

    if family == BETA11A:
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("beta11a sample must lie in [0, 1]")
        # d/da sum[log(a+1) + a log(1-x)] = n/(a+1) + sum log(1-x) = 0
        s = float(np.sum(np.log1p(-np.minimum(x, 1.0 - 1e-15))))
        a = -x.size / s - 1.0
        if a <= 0:
            raise ValueError("beta11a MLE outside the parameter domain")
        model = beta11a(a)
        ll = float(np.sum(np.log(marginal_pdf(model, x))))
        return FitReport(model, ll, 1, True)

    raise ValueError(f"unknown family {family!r}")


def _em_mixture(x: np.ndarray, mu1: float, mu2: float, tol: float = 1e-8, max_iter: int = 500):
    """EM for a two-component shared-sigma normal mixture.

    Returns ``(w, mu1, mu2, sigma, loglik_trace, converged)``; the trace is
    nondecreasing, which the test suite asserts.
    """
    n = x.size
    w = 0.5
    sigma = max(np.std(x) / 2.0, 1e-3)
    trace = []
    converged = False
    for _ in range(max_iter):
        # E step
        la = np.log(w) + stats.norm.logpdf(x, mu1, sigma)
        lb = np.log1p(-w) + stats.norm.logpdf(x, mu2, sigma)
        mx = np.maximum(la, lb)
        den = mx + np.log(np.exp(la - mx) + np.exp(lb - mx))
        trace.append(float(np.sum(den)))
        r = np.exp(la - den)
        # M step (shared sigma)
        n1 = r.sum()
        n2 = n - n1
        if n1 < 1e-10 or n2 < 1e-10:
            break
        w = n1 / n
        mu1 = float(np.sum(r * x) / n1)
        mu2 = float(np.sum((1.0 - r) * x) / n2)
        var = float(np.sum(r * (x - mu1) ** 2 + (1.0 - r) * (x - mu2) ** 2) / n)
        sigma = max(np.sqrt(var), 1e-8)
        if len(trace) >= 2 and trace[-1] - trace[-2] < tol:
            converged = True
            break
    return w, mu1, mu2, sigma, trace, converged


def _fit_mixture(x: np.ndarray) -> FitReport:
    """Quantile-split initialization plus two fixed random restarts."""
    q = np.quantile(x, [0.10, 0.25, 0.75, 0.90])
    inits = [(q[1], q[2]), (q[0], q[3])]
    rng = np.random.default_rng(0)  # fixed restarts keep the fit deterministic
    lo, hi = np.min(x), np.max(x)
    for _ in range(2):
        pair = np.sort(rng.uniform(lo, hi, size=2))
        inits.append((float(pair[0]), float(pair[1])))

    best = None
    iters = 0
    for mu1, mu2 in inits:
        if mu1 == mu2:
            mu2 = mu1 + max(1e-3, np.std(x) / 10.0)
        w, m1, m2, s, trace, conv = _em_mixture(x, float(mu1), float(mu2))
        iters += len(trace)
        if best is None or trace[-1] > best[0]:
            best = (trace[-1], w, m1, m2, s, conv)
    ll, w, m1, m2, s, conv = best
    # canonical order: mu1 <= mu2
    if m1 > m2:
        m1, m2, w = m2, m1, 1.0 - w
    return FitReport(normal_mixture(w, m1, m2, s), float(ll), iters, conv)


# ---------------------------------------------------------------------------
# bivariate elliptical CDFs

_BVN_X, _BVN_W = np.polynomial.legendre.leggauss(96)
_BVT_X, _BVT_W = np.polynomial.legendre.leggauss(128)


def bvn_cdf(rho: float, x, y):
    """Standard bivariate normal CDF ``P(X <= x, Y <= y)`` with correlation rho.

    Single-integral reduction: ``Phi(x) Phi(y)`` plus a Gauss-Legendre
    integral of the correlation derivative over [0, rho]. The integrand is
    analytic for |rho| < 1, so 96 nodes give near machine accuracy for
    |rho| <= 0.99 (well inside the 1e-7 budget).
    """
    if not -1.0 < rho < 1.0:
        raise ValueError("|rho| must be < 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = special.ndtr(x) * special.ndtr(y)
    if rho == 0.0:
        out = base
    else:
        r = 0.5 * rho * (_BVN_X + 1.0)
        wr = 0.5 * rho * _BVN_W
        xx = x[..., None]
        yy = y[..., None]
        # exp argument is -inf at infinite x or y; that term contributes 0
        with np.errstate(invalid="ignore"):
            quad_arg = -(xx * xx - 2.0 * r * xx * yy + yy * yy) / (2.0 * (1.0 - r * r))
        quad_arg = np.where(np.isnan(quad_arg), -np.inf, quad_arg)
        integ = np.exp(quad_arg) / np.sqrt(1.0 - r * r)
        out = base + (integ * wr).sum(axis=-1) / (2.0 * np.pi)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def bvt_cdf(rho: float, nu: float, x, y):
    """Bivariate Student-t CDF with correlation rho and nu degrees of freedom.

    Conditional single-integral reduction: integrate the conditional t CDF
    (nu+1 degrees of freedom) over the t-probability transform of x, with a
    128-node Gauss-Legendre rule. Absolute error is ~1e-8 for nu >= 1.
    """
    if not -1.0 < rho < 1.0:
        raise ValueError("|rho| must be < 1")
    if nu <= 0:
        raise ValueError("nu must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    fx = stats.t.cdf(x, nu)
    u = 0.5 * fx[..., None] * (_BVT_X + 1.0)
    w = 0.5 * fx[..., None] * _BVT_W
    s = stats.t.ppf(np.clip(u, 1e-300, 1.0), nu)
    yy = y[..., None]
    with np.errstate(invalid="ignore"):
        arg = (yy - rho * s) * np.sqrt((nu + 1.0) / ((nu + s * s) * (1.0 - rho * rho)))
    # s -> -inf limit of the conditional argument (finite y): sign(rho)*sqrt((nu+1)/(1-rho^2))
    limit = np.sign(rho) * np.sqrt((nu + 1.0) / (1.0 - rho * rho)) if rho != 0.0 else 0.0
    arg = np.where(np.isnan(arg), np.where(np.isinf(yy), yy, limit), arg)
    out = np.sum(w * stats.t.cdf(arg, nu + 1.0), axis=-1)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
