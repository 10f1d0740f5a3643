"""Seasonal ARIMA estimated by conditional sum of squares.

The estimator is deliberately lightweight: difference the series, subtract
the sample mean when no differencing is applied, and minimize the sum of
squared one-step residuals with a Nelder-Mead search started from a zero
coefficient vector.  Order selection is an exhaustive grid search over a
small seasonal grid, scored by AICc.

Conventions: the AR polynomial is 1 - phi_1 B - ... and the MA polynomial
is 1 + theta_1 B + ... (R/statsmodels sign convention); the seasonal
factors multiply the nonseasonal ones.  Pre-sample values of the centered
differenced series and of the shocks are conditioned to zero, so the
residual count always equals the differenced length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._optim import nelder_mead
from .errors import InsufficientDataError, NonconvergenceError, ValidationError
from .series import QuarterlySeries

SEASONAL_PERIOD = 4

# Bounds of the order grid; 14-16 quarterly observations cannot support more.
MAX_P, MAX_D, MAX_Q = 2, 1, 2
MAX_SP, MAX_SD, MAX_SQ = 1, 1, 1

_MAX_ITER = 500
_CSS_TOL = 1e-8
_N_RESTARTS = 3
_RESTART_SEED = 20090401  # fixed so refits are bit-reproducible

_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class ArimaOrder:
    """(p,d,q)(P,D,Q) with seasonal period 4."""

    p: int
    d: int
    q: int
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = SEASONAL_PERIOD

    def __post_init__(self):
        for name, value, bound in (
            ("p", self.p, MAX_P),
            ("d", self.d, MAX_D),
            ("q", self.q, MAX_Q),
            ("P", self.P, MAX_SP),
            ("D", self.D, MAX_SD),
            ("Q", self.Q, MAX_SQ),
        ):
            if not 0 <= value <= bound:
                raise ValidationError(f"order {name}={value} outside 0..{bound}")
        if self.s != SEASONAL_PERIOD:
            raise ValidationError(f"seasonal period must be {SEASONAL_PERIOD}, got {self.s}")

    @property
    def n_coeffs(self) -> int:
        return self.p + self.q + self.P + self.Q

    @property
    def has_intercept(self) -> bool:
        return self.d + self.D == 0

    @property
    def n_free_params(self) -> int:
        return self.n_coeffs + (1 if self.has_intercept else 0)

    def __str__(self) -> str:
        return f"({self.p},{self.d},{self.q})({self.P},{self.D},{self.Q})[{self.s}]"


@dataclass(frozen=True)
class ArimaFit:
    """A fitted model plus everything needed to forecast from it."""

    order: ArimaOrder
    ar_coeffs: tuple[float, ...]
    ma_coeffs: tuple[float, ...]
    seasonal_ar: tuple[float, ...]
    seasonal_ma: tuple[float, ...]
    intercept: float | None
    sigma2: float
    aicc: float
    training_series: QuarterlySeries
    residuals: tuple[float, ...]


def difference(values, d: int, D: int, s: int = SEASONAL_PERIOD) -> np.ndarray:
    """Apply d first differences, then D seasonal (lag-s) differences."""
    out = np.asarray(values, dtype=float)
    if len(out) <= d + s * D:
        raise InsufficientDataError(
            f"need more than {d + s * D} points to difference, have {len(out)}"
        )
    for _ in range(d):
        out = out[1:] - out[:-1]
    for _ in range(D):
        out = out[s:] - out[:-s]
    return out


def _ar_factor_stationary(phi) -> bool:
    """Roots of 1 - phi_1 B - phi_2 B^2 outside the unit circle (closed form)."""
    if len(phi) == 0:
        return True
    if len(phi) == 1:
        return abs(phi[0]) < 1.0
    p1, p2 = phi[0], phi[1]
    return abs(p2) < 1.0 and p1 + p2 < 1.0 and p2 - p1 < 1.0


def _ma_factor_invertible(theta) -> bool:
    """Roots of 1 + theta_1 B + theta_2 B^2 outside the unit circle."""
    return _ar_factor_stationary([-t for t in theta])


def _split_params(x, order: ArimaOrder):
    p, q, P, Q = order.p, order.q, order.P, order.Q
    phi = x[:p]
    theta = x[p : p + q]
    sphi = x[p + q : p + q + P]
    stheta = x[p + q + P : p + q + P + Q]
    return phi, theta, sphi, stheta


def _combined_polys(phi, theta, sphi, stheta, s: int):
    """Multiply nonseasonal and seasonal factors into single lag polynomials.

    With at most two nonseasonal and one seasonal coefficient per side the
    products are written out directly; no polynomial convolution needed.
    """
    ar = [1.0] + [-float(v) for v in phi]
    if len(sphi):
        sp = float(sphi[0])
        ar = ar + [0.0] * (s + 1 - len(ar))
        ar[s] -= sp
        for v in phi:
            ar.append(float(v) * sp)
    ma = [1.0] + [float(v) for v in theta]
    if len(stheta):
        st = float(stheta[0])
        ma = ma + [0.0] * (s + 1 - len(ma))
        ma[s] += st
        for v in theta:
            ma.append(float(v) * st)
    return ar, ma


def _admissible(phi, theta, sphi, stheta) -> bool:
    return (
        _ar_factor_stationary(phi)
        and _ma_factor_invertible(theta)
        and _ar_factor_stationary(sphi)
        and _ma_factor_invertible(stheta)
    )


def _residuals_from_polys(z: list, ar: list, ma: list) -> list:
    """One-step residuals with zero pre-sample values on both sides.

    Everything stays in plain Python floats: the series here are at most a
    few hundred points, and short-loop float arithmetic beats array setup.
    """
    n = len(z)
    nar = len(ar) - 1
    if nar > 0:
        ar1 = ar[1:]
        x = []
        push = x.append
        for t in range(n):
            acc = z[t]
            depth = t if t < nar else nar
            for j in range(depth):
                acc += ar1[j] * z[t - 1 - j]
            push(acc)
    else:
        x = z
    nma = len(ma) - 1
    if nma > 0:
        ma1 = ma[1:]
        e: list[float] = []
        push = e.append
        for t in range(n):
            acc = x[t]
            depth = t if t < nma else nma
            for j in range(depth):
                acc -= ma1[j] * e[t - 1 - j]
            push(acc)
        return e
    return list(x)


def fit_arima(series: QuarterlySeries, order: ArimaOrder) -> ArimaFit:
    """Estimate the given order on the series by minimizing the CSS.

    Raises InsufficientDataError when the differenced series is shorter
    than the free parameter count plus three, and NonconvergenceError when
    the optimizer cannot find an admissible coefficient vector.
    """
    y = series.to_array()
    w = difference(y, order.d, order.D, order.s)
    n_res = w.size
    if n_res < order.n_free_params + 3:
        raise InsufficientDataError(
            f"order {order}: differenced length {n_res} < {order.n_free_params + 3}"
        )

    intercept = float(np.mean(w)) if order.has_intercept else None
    z = (w - intercept if intercept is not None else w).tolist()

    scale = sum(v * v for v in z)
    denom = scale if scale > 0.0 else 1.0

    if order.n_coeffs == 0:
        coeffs = np.empty(0)
    else:

        def objective(xs):
            phi, theta, sphi, stheta = _split_params(xs, order)
            if not _admissible(phi, theta, sphi, stheta):
                return np.inf
            ar, ma = _combined_polys(phi, theta, sphi, stheta, order.s)
            e = _residuals_from_polys(z, ar, ma)
            return sum(v * v for v in e) / denom

        coeffs = None
        rng = np.random.default_rng(_RESTART_SEED)
        x0 = [0.0] * order.n_coeffs
        for attempt in range(1 + _N_RESTARTS):
            # A spread-out starting simplex; a microscopic perturbation of a
            # zero vector wastes iterations expanding.
            simplex = [list(x0)]
            for i in range(order.n_coeffs):
                vertex = list(x0)
                vertex[i] += 0.2
                simplex.append(vertex)
            best_x, best_fun, _ = nelder_mead(
                objective,
                x0,
                initial_simplex=simplex,
                maxiter=_MAX_ITER,
                xatol=1e-3,
                fatol=_CSS_TOL,
            )
            if np.isfinite(best_fun):
                coeffs = best_x
                break
            x0 = rng.uniform(-0.2, 0.2, size=order.n_coeffs).tolist()
        if coeffs is None:
            raise NonconvergenceError(f"order {order}: optimizer found no admissible point")

    phi, theta, sphi, stheta = _split_params(list(coeffs), order)
    ar, ma = _combined_polys(phi, theta, sphi, stheta, order.s)
    e = _residuals_from_polys(z, ar, ma)
    css = sum(v * v for v in e)
    sigma2 = css / n_res

    k = order.n_free_params + 1
    if n_res - k - 1 > 0:
        aicc = n_res * np.log(max(css / n_res, _LOG_FLOOR)) + 2.0 * k * n_res / (n_res - k - 1)
    else:
        aicc = np.inf

    return ArimaFit(
        order=order,
        ar_coeffs=tuple(float(v) for v in phi),
        ma_coeffs=tuple(float(v) for v in theta),
        seasonal_ar=tuple(float(v) for v in sphi),
        seasonal_ma=tuple(float(v) for v in stheta),
        intercept=intercept,
        sigma2=sigma2,
        aicc=float(aicc),
        training_series=series,
        residuals=tuple(float(v) for v in e),
    )


def order_grid() -> list[ArimaOrder]:
    """Every candidate order, in the lexicographic tie-break order."""
    grid = []
    for p in range(MAX_P + 1):
        for d in range(MAX_D + 1):
            for q in range(MAX_Q + 1):
                for P in range(MAX_SP + 1):
                    for D in range(MAX_SD + 1):
                        for Q in range(MAX_SQ + 1):
                            grid.append(ArimaOrder(p, d, q, P, D, Q))
    return grid


def auto_select(series: QuarterlySeries) -> ArimaFit:
    """Fit the whole order grid and return the lowest-AICc converged fit.

    Candidates whose data is insufficient after differencing are skipped;
    ties resolve to the earlier order in (p,d,q,P,D,Q) lexicographic order.
    """
    if len(series) < 10:
        raise InsufficientDataError(f"auto selection needs >= 10 points, have {len(series)}")
    best: ArimaFit | None = None
    for order in order_grid():
        try:
            fit = fit_arima(series, order)
        except (InsufficientDataError, NonconvergenceError):
            continue
        if best is None or fit.aicc < best.aicc:
            best = fit
    if best is None:
        raise NonconvergenceError("no ARIMA candidate converged on this series")
    return best


def forecast_arima(fit: ArimaFit, h: int) -> np.ndarray:
    """Recursive point forecasts h steps ahead on the original scale."""
    if not 1 <= h <= 8:
        raise ValidationError(f"forecast horizon must be in 1..8, got {h}")
    order = fit.order
    y = fit.training_series.to_array()

    # Rebuild the differencing chain so forecasts can be re-integrated.
    chain = [y]
    for _ in range(order.d):
        chain.append(chain[-1][1:] - chain[-1][:-1])
    for _ in range(order.D):
        chain.append(chain[-1][order.s :] - chain[-1][: -order.s])
    w = chain[-1]
    mu = fit.intercept if fit.intercept is not None else 0.0
    z = (w - mu).tolist()
    e = list(fit.residuals)

    ar, ma = _combined_polys(fit.ar_coeffs, fit.ma_coeffs, fit.seasonal_ar, fit.seasonal_ma, order.s)
    n = len(z)
    for step in range(h):
        t = n + step
        val = 0.0
        for j in range(1, len(ar)):
            if t - j >= 0:
                val -= ar[j] * z[t - j]
        for j in range(1, len(ma)):
            if 0 <= t - j < n:
                val += ma[j] * e[t - j]
        z.append(val)
    fore = np.asarray(z[n:]) + mu

    # Invert seasonal differences first, then the first differences.
    level = len(chain) - 1
    for _ in range(order.D):
        level -= 1
        hist = list(chain[level])
        out = []
        for f in fore:
            nxt = f + hist[-order.s]
            hist.append(nxt)
            out.append(nxt)
        fore = np.asarray(out)
    for _ in range(order.d):
        level -= 1
        hist = list(chain[level])
        out = []
        for f in fore:
            nxt = f + hist[-1]
            hist.append(nxt)
            out.append(nxt)
        fore = np.asarray(out)
    return fore
