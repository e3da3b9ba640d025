# Mean prices under volatility and autocorrelation
# =================================================
#
# The linearized two-date pricing equation makes the mean price today a
# fixed point: it appears inside the mean consumption on the right side.
# With concave utility every variance term lowers the solved price, and
# holding an earlier lot makes the price (and payoff) autocorrelation
# between the trades a priced risk as well.


from mbm import (
    PricingScenario,
    TwoTradeScenario,
    UtilitySpec,
    sdf,
    solve_price_first_purchase,
    solve_price_second_purchase,
    solve_price_single,
    solve_price_two_sales,
)

LOG = UtilitySpec("log")

# --- 1. the risk-neutral anchor and the volatility discount ----------------

linear = PricingScenario(utility=UtilitySpec("linear"), beta=0.95, endowment_t=10,
                         endowment_T=10, holdings=1, payoff_mean=5,
                         payoff_variance=2.0, price_variance=2.0)
print(f"linear utility ignores risk: p0 = {solve_price_single(linear).mean_price} "
      f"(beta * x0 = {0.95 * 5})")

print("\nlog utility, payoff variance sweep:")
for var in (0.0, 0.5, 1.0, 2.0):
    scn = PricingScenario(utility=LOG, beta=0.95, endowment_t=10, endowment_T=10,
                          holdings=1, payoff_mean=5, payoff_variance=var)
    sol = solve_price_single(scn)
    print(f"  sigma_x^2={var:4.1f}  p0={sol.mean_price:.6f}  "
          f"(residual {sol.residual:+.1e}, {sol.iterations} iterations)")

print(f"\nstochastic discount factor at the solved point: "
      f"{sdf(LOG, 0.95, 10 - 2.33, 10 + 5):.4f}")

# --- 2. second purchase: price autocorrelation enters -----------------------

def two_trade(b_p=0.0, b_x=None):
    return TwoTradeScenario(
        utility=LOG, beta=0.95, endowment_t=10, endowment_T=10, holdings=1,
        payoff_mean=5, payoff_variance=1.0, price_variance=1.0, holdings2=1.0,
        payoff_mean2=5.0, payoff_variance2=1.0, price_variance2=1.0,
        price_autocorr=b_p, payoff_autocorr=b_x,
        T2=3.0 if b_x is not None else None,
    )

print("\nsecond purchase, both lots sold together:")
first = solve_price_first_purchase(two_trade())
print(f"  p0(t1) = {first.mean_price:.6f}")
for b_p in (0.0, 0.5, 1.0):
    sol = solve_price_second_purchase(two_trade(b_p=b_p), first=first)
    print(f"  B_p={b_p:3.1f}  p0(t2)={sol.mean_price:.6f}")

# --- 3. two sales: payoff autocorrelation joins in ---------------------------

print("\ntwo separate sales, payoff autocorrelation sweep (B_p fixed at 0.5):")
for b_x in (0.0, 0.5, 1.0):
    sol = solve_price_two_sales(two_trade(b_p=0.5, b_x=b_x))
    print(f"  B_x={b_x:3.1f}  p0(t2)={sol.mean_price:.6f}")

# --- 4. consistency: the second trade vanishes -------------------------------
#
# As the second lot shrinks to nothing with B_p set to the price variance
# at t1, the second-purchase equation collapses onto the first-purchase one.

tiny = TwoTradeScenario(
    utility=LOG, beta=0.95, endowment_t=10, endowment_T=10, holdings=1,
    payoff_mean=5, payoff_variance=1.0, price_variance=1.0, holdings2=1e-12,
    payoff_mean2=5.0, payoff_variance2=1.0, price_variance2=1.0, price_autocorr=1.0,
)
f = solve_price_first_purchase(tiny)
s = solve_price_second_purchase(tiny, first=f)
print(f"\nxi(t2)=1e-12: |p0(t2) - p0(t1)| = {abs(s.mean_price - f.mean_price):.2e}")
