"""Mean-price solvers for the linearized two-date pricing equations.

The first-order condition of two-date expected-utility maximization,
E[u'(c_t) p] = beta E[u'(c_T) x], linearized to first order in price and
payoff deviations, gives an implicit equation for the mean price p0:

    p0 = beta * (u'(cT0)/u'(ct0)) * x0
       + beta * (u''(cT0)/u'(ct0)) * (payoff variance terms)
       +        (u''(ct0)/u'(ct0)) * (price variance terms)

with ct0 = e_t - p0 * xi, so p0 appears on both sides. Three variants are
solved here: a single purchase/sale, the second of two purchases sold
together (price autocorrelation enters), and the second of two purchases
sold separately (payoff autocorrelation enters as well). Since u'' <= 0,
every variance or positive autocorrelation term drags the mean price down.

Solver strategy: damped fixed-point iteration seeded at beta * x0 (exact
for linear utility), with a bracketed root-finding fallback on the residual
when iteration stalls. Converged solutions honor
|residual| <= 1e-10 * max(1, |p0|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DataError, DomainError
from .utility import UtilitySpec, admissible, eval_utility

RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True, slots=True, kw_only=True)
class SolverOptions:
    max_iterations: int = 200
    damping: float = 0.5
    tolerance: float = RESIDUAL_RTOL

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DataError("max_iterations must be >= 1")
        if not (0.0 < self.damping <= 1.0):
            raise DataError("damping must be in (0, 1]")
        if not (self.tolerance > 0.0):
            raise DataError("tolerance must be positive")


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True, slots=True, kw_only=True)
class PricingScenario:
    """Inputs for the single purchase/sale equation.

    payoff_mean is the full expected payoff (expected resale price plus
    dividend_mean); dividend_mean is kept as an informational decomposition
    and does not enter the equations separately.
    """

    utility: UtilitySpec
    beta: float
    endowment_t: float
    endowment_T: float
    holdings: float
    payoff_mean: float
    payoff_variance: float = 0.0
    price_variance: float = 0.0
    dividend_mean: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise DataError(f"beta must be in (0, 1], got {self.beta}")
        if self.payoff_variance < 0.0 or self.price_variance < 0.0:
            raise DataError("variances must be non-negative")
        if self.holdings < 0.0:
            raise DataError(f"holdings must be non-negative, got {self.holdings}")

    def to_json_dict(self) -> dict:
        return {
            "utility": {"family": self.utility.family, "parameter": self.utility.parameter},
            "beta": self.beta,
            "endowment_t": self.endowment_t,
            "endowment_T": self.endowment_T,
            "holdings": self.holdings,
            "payoff_mean": self.payoff_mean,
            "payoff_variance": self.payoff_variance,
            "price_variance": self.price_variance,
            "dividend_mean": self.dividend_mean,
        }


def _check_cauchy_schwarz(name: str, cov: float, var1: float, var2: float):
    bound = math.sqrt(var1 * var2)
    if abs(cov) > bound + 1e-12 * max(1.0, bound):
        raise DataError(
            f"{name}={cov:g} violates the Cauchy-Schwarz bound sqrt({var1:g}*{var2:g})={bound:g}"
        )


@dataclass(frozen=True, slots=True, kw_only=True)
class TwoTradeScenario(PricingScenario):
    """Two purchases at t1 < t2, sold at T1 (and T2 for the two-sale case).

    Base fields describe the first purchase; *2 fields the second.
    payoff_autocorr (and the T2 time) being set marks a two-sale scenario;
    payoff_mean12 is the mean first-lot payoff as re-forecast at t2 and
    defaults to payoff_mean2. Autocorrelations are validated against their
    Cauchy-Schwarz bounds at construction so inconsistent inputs fail fast.
    """

    holdings2: float = 0.0
    payoff_mean2: float = 0.0
    payoff_variance2: float = 0.0
    price_variance2: float = 0.0
    price_autocorr: float = 0.0
    payoff_autocorr: float | None = None
    payoff_mean12: float | None = None
    t1: float = 0.0
    t2: float = 1.0
    T1: float = 2.0
    T2: float | None = None

    def __post_init__(self):
        PricingScenario.__post_init__(self)
        if self.holdings2 < 0.0:
            raise DataError(f"holdings2 must be non-negative, got {self.holdings2}")
        if self.payoff_variance2 < 0.0 or self.price_variance2 < 0.0:
            raise DataError("variances must be non-negative")
        _check_cauchy_schwarz(
            "price_autocorr", self.price_autocorr, self.price_variance, self.price_variance2
        )
        if self.two_sale:
            _check_cauchy_schwarz(
                "payoff_autocorr", self.payoff_autocorr, self.payoff_variance, self.payoff_variance2
            )
            if self.T2 is None:
                raise DataError("two-sale scenario needs T2")
            if not (self.t1 < self.t2 <= self.T1 <= self.T2):
                raise DataError(
                    f"need t1 < t2 <= T1 <= T2, got {self.t1}, {self.t2}, {self.T1}, {self.T2}"
                )
        else:
            if self.T2 is not None or self.payoff_mean12 is not None:
                raise DataError(
                    "T2/payoff_mean12 are two-sale fields; set payoff_autocorr as well"
                )
            if not (self.t1 < self.t2 < self.T1):
                raise DataError(f"need t1 < t2 < T, got {self.t1}, {self.t2}, {self.T1}")

    @property
    def two_sale(self) -> bool:
        return self.payoff_autocorr is not None

    @property
    def first_lot_payoff_mean(self) -> float:
        return self.payoff_mean2 if self.payoff_mean12 is None else self.payoff_mean12

    def to_json_dict(self) -> dict:
        out = PricingScenario.to_json_dict(self)
        out.update(
            {
                "holdings2": self.holdings2,
                "payoff_mean2": self.payoff_mean2,
                "payoff_variance2": self.payoff_variance2,
                "price_variance2": self.price_variance2,
                "price_autocorr": self.price_autocorr,
                "payoff_autocorr": self.payoff_autocorr,
                "payoff_mean12": self.payoff_mean12,
                "t1": self.t1,
                "t2": self.t2,
                "T1": self.T1,
                "T2": self.T2,
            }
        )
        return out


@dataclass(frozen=True, slots=True)
class PriceSolution:
    mean_price: float
    residual: float
    iterations: int
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "mean_price": self.mean_price,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def sdf(utility: UtilitySpec, beta: float, c_t: float, c_T: float) -> float:
    """Stochastic discount factor beta * u'(c_T) / u'(c_t); always positive."""
    return beta * eval_utility(utility, c_T, 1) / eval_utility(utility, c_t, 1)


def _price_upper_bound(scn: PricingScenario, holdings: float, spent: float) -> float:
    # largest trial price keeping today's mean consumption admissible
    if scn.utility.family in ("log", "power") and holdings > 0.0:
        return (scn.endowment_t - spent) / holdings
    return math.inf


def _solve_implicit(rhs, seed: float, hi_bound: float, options: SolverOptions) -> PriceSolution:
    """Damped fixed-point on p = rhs(p), bracketed fallback on rhs(p) - p.

    Iteration aims two decades below the residual contract so downstream
    oracle comparisons at the contract tolerance have headroom; an iterate
    that merely satisfies the contract is still accepted if the tighter
    target proves unreachable.
    """

    def residual(p: float) -> float:
        return rhs(p) - p

    tol = options.tolerance
    margin = 1e-12 * max(1.0, abs(hi_bound)) if math.isfinite(hi_bound) else 0.0
    hi_adm = hi_bound - margin

    def safe_residual(p: float) -> float:
        try:
            return residual(p)
        except (DomainError, ZeroDivisionError, OverflowError):
            return math.nan

    runaway = 1e12 * max(1.0, abs(seed))
    p = min(seed, hi_adm) if math.isfinite(hi_bound) else seed
    iterations = 0
    best: tuple[float, float, int] | None = None
    for _ in range(options.max_iterations):
        iterations += 1
        r = safe_residual(p)
        if math.isnan(r):
            break  # iterate escaped the evaluable region; switch to bracketing
        scale = max(1.0, abs(p))
        if abs(r) <= tol * scale:
            best = (p, r, iterations)
            if abs(r) <= 0.01 * tol * scale:
                break
        p_next = p + options.damping * r
        if not math.isfinite(p_next) or p_next >= hi_adm or abs(p_next) > runaway:
            break
        p = p_next
    if best is not None:
        return PriceSolution(
            mean_price=best[0], residual=best[1], iterations=best[2], converged=True
        )

    # bracketed fallback: scan an expanding interval for a sign change
    span = max(1.0, 10.0 * abs(seed))
    for _ in range(3):
        lo = seed - span
        hi = min(seed + span, hi_adm)
        grid = np.linspace(lo, hi, 129)
        res = np.array([safe_residual(g) for g in grid])
        finite = np.isfinite(res)
        pair_ok = finite[:-1] & finite[1:]
        flips = np.nonzero(pair_ok & (np.sign(res[:-1]) * np.sign(res[1:]) < 0))[0]
        exact = np.nonzero(finite & (res == 0.0))[0]
        if exact.size:
            p = float(grid[exact[0]])
            return PriceSolution(mean_price=p, residual=0.0, iterations=iterations, converged=True)
        if flips.size:
            a, b = float(grid[flips[0]]), float(grid[flips[0] + 1])
            root, info = brentq(residual, a, b, xtol=1e-14, rtol=8.9e-16, full_output=True)
            r = residual(root)
            iterations += info.iterations
            if abs(r) <= tol * max(1.0, abs(root)):
                return PriceSolution(
                    mean_price=float(root), residual=r, iterations=iterations, converged=True
                )
            raise ConvergenceError(
                f"bracketed solve left residual {r:g} above tolerance at p0={root:g}"
            )
        span *= 8.0
    raise ConvergenceError(
        f"no admissible mean price satisfies the equation (searched around {seed:g}); "
        "check endowments and volatility inputs"
    )


def _ratio_terms(utility: UtilitySpec, c_t0: float, c_T0: float):
    up_t = eval_utility(utility, c_t0, 1)
    if not (up_t > 0.0) or not math.isfinite(up_t):
        raise DomainError(
            f"marginal utility unusable at mean consumption {c_t0:g}"
        )
    up_T = eval_utility(utility, c_T0, 1)
    upp_t = eval_utility(utility, c_t0, 2)
    upp_T = eval_utility(utility, c_T0, 2)
    return up_T / up_t, upp_T / up_t, upp_t / up_t


def solve_price_single(
    scn: PricingScenario, options: SolverOptions = DEFAULT_OPTIONS
) -> PriceSolution:
    """Solve the single-trade mean-price equation.

    Mean consumptions are ct0 = e_t - p0*xi and cT0 = e_T + x0*xi; the
    equation is implicit in p0 through ct0. Linear utility collapses it to
    p0 = beta * x0 exactly, which is also the iteration seed.
    """
    xi = scn.holdings
    c_T0 = scn.endowment_T + scn.payoff_mean * xi
    if not admissible(scn.utility, c_T0):
        raise DomainError(f"sale-date mean consumption {c_T0:g} inadmissible")

    def rhs(p0: float) -> float:
        c_t0 = scn.endowment_t - p0 * xi
        if not admissible(scn.utility, c_t0):
            raise DomainError(
                f"purchase-date mean consumption {c_t0:g} inadmissible at trial p0={p0:g}"
            )
        r_up, r_upp_T, r_upp_t = _ratio_terms(scn.utility, c_t0, c_T0)
        return (
            scn.beta * r_up * scn.payoff_mean
            + scn.beta * r_upp_T * xi * scn.payoff_variance
            + r_upp_t * xi * scn.price_variance
        )

    seed = scn.beta * scn.payoff_mean
    return _solve_implicit(rhs, seed, _price_upper_bound(scn, xi, 0.0), options)


def solve_price_first_purchase(
    scn: TwoTradeScenario, options: SolverOptions = DEFAULT_OPTIONS
) -> PriceSolution:
    """First-purchase equation of a two-trade scenario; same structure as
    the single-trade equation applied to the t1 fields."""
    return solve_price_single(scn, options)


def solve_price_second_purchase(
    scn: TwoTradeScenario,
    options: SolverOptions = DEFAULT_OPTIONS,
    first: PriceSolution | None = None,
) -> PriceSolution:
    """Solve for the second-purchase mean price p0(t2), both lots sold at T.

    The first-purchase price enters as a known input (solved here when not
    supplied). Holding the first lot makes its price autocorrelation with
    the current window a price of risk: the term xi(t1) * B_p joins
    xi(t2) * sigma_p^2(t2) under u''(ct0)/u'(ct0).
    """
    if first is None:
        first = solve_price_first_purchase(scn, options)
    p1 = first.mean_price
    xi1, xi2 = scn.holdings, scn.holdings2
    spent = p1 * xi1
    c_T0 = scn.endowment_T + scn.payoff_mean2 * (xi1 + xi2)
    if not admissible(scn.utility, c_T0):
        raise DomainError(f"sale-date mean consumption {c_T0:g} inadmissible")

    def rhs(p0: float) -> float:
        c_t0 = scn.endowment_t - spent - p0 * xi2
        if not admissible(scn.utility, c_t0):
            raise DomainError(
                f"second-purchase mean consumption {c_t0:g} inadmissible at trial p0={p0:g}"
            )
        r_up, r_upp_T, r_upp_t = _ratio_terms(scn.utility, c_t0, c_T0)
        return (
            scn.beta * r_up * scn.payoff_mean2
            + scn.beta * r_upp_T * (xi1 + xi2) * scn.payoff_variance2
            + r_upp_t * (xi1 * scn.price_autocorr + xi2 * scn.price_variance2)
        )

    seed = scn.beta * scn.payoff_mean2
    return _solve_implicit(rhs, seed, _price_upper_bound(scn, xi2, spent), options)


def solve_price_two_sales(
    scn: TwoTradeScenario,
    options: SolverOptions = DEFAULT_OPTIONS,
    first: PriceSolution | None = None,
) -> PriceSolution:
    """Solve for p0(t2) when the lots are sold separately at T1 and T2.

    Relative to the single-sale second-purchase equation, the first lot's
    payoff variance contribution is replaced by the payoff autocorrelation
    between the two sale forecasts: beta * u''(cT0)/u'(ct0) multiplies
    xi(t1) * B_x + xi(t2) * sigma_x2^2. Setting B_x equal to sigma_x2^2 and
    the re-forecast first-lot payoff mean equal to the second-lot mean
    reproduces the single-sale equation term for term.
    """
    if not scn.two_sale:
        raise DataError("scenario has no two-sale fields (payoff_autocorr, T2)")
    if first is None:
        first = solve_price_first_purchase(scn, options)
    p1 = first.mean_price
    xi1, xi2 = scn.holdings, scn.holdings2
    spent = p1 * xi1
    c_T0 = scn.endowment_T + scn.first_lot_payoff_mean * xi1 + scn.payoff_mean2 * xi2
    if not admissible(scn.utility, c_T0):
        raise DomainError(f"sale-date mean consumption {c_T0:g} inadmissible")

    def rhs(p0: float) -> float:
        c_t0 = scn.endowment_t - spent - p0 * xi2
        if not admissible(scn.utility, c_t0):
            raise DomainError(
                f"second-purchase mean consumption {c_t0:g} inadmissible at trial p0={p0:g}"
            )
        r_up, r_upp_T, r_upp_t = _ratio_terms(scn.utility, c_t0, c_T0)
        return (
            scn.beta * r_up * scn.payoff_mean2
            + scn.beta * r_upp_T * (xi1 * scn.payoff_autocorr + xi2 * scn.payoff_variance2)
            + r_upp_t * (xi1 * scn.price_autocorr + xi2 * scn.price_variance2)
        )

    seed = scn.beta * scn.payoff_mean2
    return _solve_implicit(rhs, seed, _price_upper_bound(scn, xi2, spent), options)


def linearized_marginal_expectation(
    utility: UtilitySpec, mean_c: float, mean_p: float, variance_p: float, holdings: float
) -> float:
    """Linearized E[u'(c) p]: u'(mean_c)*mean_p - holdings*u''(mean_c)*variance_p."""
    return (
        eval_utility(utility, mean_c, 1) * mean_p
        - holdings * eval_utility(utility, mean_c, 2) * variance_p
    )


def _consumptions(scn: PricingScenario, samples, holdings: float, endowment: float, sign: float):
    c = endowment + sign * np.asarray(samples, dtype=float) * holdings
    if not admissible(scn.utility, c):
        raise DomainError(
            f"consumption inadmissible for some sample at holdings {holdings:g}"
        )
    return c


def residual_basic_eq(
    scn: PricingScenario, price_samples, payoff_samples, holdings: float
) -> float:
    """Sampled residual of the exact first-order condition.

    mean[u'(e_t - p*xi) * p] - beta * mean[u'(e_T + x*xi) * x]; zero at an
    interior expected-utility optimum in xi.
    """
    p = np.asarray(price_samples, dtype=float)
    x = np.asarray(payoff_samples, dtype=float)
    if p.size == 0 or x.size == 0:
        raise DataError("need non-empty price and payoff samples")
    c_t = _consumptions(scn, p, holdings, scn.endowment_t, -1.0)
    c_T = _consumptions(scn, x, holdings, scn.endowment_T, +1.0)
    lhs = float(np.mean(eval_utility(scn.utility, c_t, 1) * p))
    rhs = scn.beta * float(np.mean(eval_utility(scn.utility, c_T, 1) * x))
    return lhs - rhs


@dataclass(frozen=True, slots=True)
class HoldingsOptimum:
    holdings: float
    at_boundary: bool
    objective: float
    foc_residual: float

    def to_json_dict(self) -> dict:
        return {
            "holdings": self.holdings,
            "at_boundary": self.at_boundary,
            "objective": self.objective,
            "foc_residual": self.foc_residual,
        }


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_holdings(
    scn: PricingScenario, price_samples, payoff_samples, bounds: tuple[float, float]
) -> HoldingsOptimum:
    """Maximize mean[u(e_t - p*xi)] + beta * mean[u(e_T + x*xi)] over xi.

    Golden-section search localizes the maximum, then bisection on the
    derivative polishes interior optima until the sampled first-order
    condition is met to rounding. When the maximum sits on a bound the
    boundary point is returned with at_boundary set.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (hi > lo):
        raise DataError(f"bounds must satisfy lo < hi, got ({lo}, {hi})")
    p = np.asarray(price_samples, dtype=float)
    x = np.asarray(payoff_samples, dtype=float)
    if p.size == 0 or x.size == 0:
        raise DataError("need non-empty price and payoff samples")

    def objective(xi: float) -> float:
        c_t = _consumptions(scn, p, xi, scn.endowment_t, -1.0)
        c_T = _consumptions(scn, x, xi, scn.endowment_T, +1.0)
        return float(
            np.mean(eval_utility(scn.utility, c_t, 0))
            + scn.beta * np.mean(eval_utility(scn.utility, c_T, 0))
        )

    def derivative(xi: float) -> float:
        return -residual_basic_eq(scn, p, x, xi)

    # bounds must keep every sampled consumption admissible
    d_lo = derivative(lo)
    d_hi = derivative(hi)

    # concavity check: the derivative must not increase across the range
    grid = np.linspace(lo, hi, 9)
    dgrid = np.array([derivative(g) for g in grid])
    slack = 1e-9 * max(1.0, float(np.max(np.abs(dgrid))))
    if np.any(np.diff(dgrid) > slack):
        raise DataError("objective is not concave in holdings over the given bounds")

    def finish(xi: float, at_boundary: bool) -> HoldingsOptimum:
        return HoldingsOptimum(
            holdings=xi,
            at_boundary=at_boundary,
            objective=objective(xi),
            foc_residual=residual_basic_eq(scn, p, x, xi),
        )

    if d_lo <= 0.0:
        return finish(lo, True)
    if d_hi >= 0.0:
        return finish(hi, True)

    # golden-section bracket of the interior maximum
    a, b = lo, hi
    c1 = b - _GOLDEN * (b - a)
    c2 = a + _GOLDEN * (b - a)
    f1, f2 = objective(c1), objective(c2)
    for _ in range(200):
        if b - a <= 1e-12 * max(1.0, abs(a) + abs(b)):
            break
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + _GOLDEN * (b - a)
            f2 = objective(c2)
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - _GOLDEN * (b - a)
            f1 = objective(c1)

    # polish the first-order condition by bisecting the derivative
    left, right = lo, hi
    if derivative(a) > 0.0:
        left = a
    if derivative(b) < 0.0:
        right = b
    for _ in range(200):
        mid = 0.5 * (left + right)
        d = derivative(mid)
        if d == 0.0 or right - left <= 4.0 * math.ulp(max(abs(left), abs(right), 1.0)):
            left = right = mid
            break
        if d > 0.0:
            left = mid
        else:
            right = mid
    xi_star = 0.5 * (left + right)
    return finish(xi_star, False)
