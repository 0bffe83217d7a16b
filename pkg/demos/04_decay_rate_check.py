"""End-to-end decay-rate verification.

For each environment family: compute quenched survival probabilities over a
doubling ladder of n, fit ln P against n^(1-2 alpha), and compare the slope
with the predicted decay constant -C_{g,h} * sigma_Q^2 * gamma(sigma_A/sigma_Q).
A random environment strictly steepens the decay relative to the classical
fixed-law walk at the same tube.
"""

import tubewalk as tw

template = tw.TubeTemplate(g=-1.0, h=1.0, alpha=0.3)
n_list = [200, 400, 800, 1600, 3200]

print("classical fixed-law walk (gamma source: reference pi^2/2)")
deg = tw.theorem_check(
    tw.EnvironmentSpec.rademacher(), template, n_list,
    estimator="dp", gamma_source="reference", seed=11, tolerance=0.20,
)
print(f"  slope = {deg.fit.slope:8.4f}   predicted = {deg.predicted:8.4f}   "
      f"discrepancy = {deg.discrepancy:6.2%}   passed = {deg.passed}")

print("random shift +-0.5 (gamma source: numerical estimate at beta = 0.5)")
rsb = tw.theorem_check(
    tw.EnvironmentSpec.random_shift_bernoulli(0.5), template, n_list,
    estimator="dp", gamma_source="estimate", seed=11, tolerance=0.25,
)
print(f"  slope = {rsb.fit.slope:8.4f}   predicted = {rsb.predicted:8.4f}   "
      f"discrepancy = {rsb.discrepancy:6.2%}   passed = {rsb.passed}")

print()
print(f"environment effect: |{rsb.fit.slope:.4f}| > |{deg.fit.slope:.4f}| -- the random")
print("environment strictly increases the decay rate at the same tube, by the")
print("strict growth of gamma in beta.")

print()
print("widening tube g = -1-s, h = 1+s (width functional C drops from 1/4 to 1/8)")
wide = tw.TubeTemplate(g=((0, -1.0), (1, -2.0)), h=((0, 1.0), (1, 2.0)), alpha=0.3)
curved = tw.theorem_check(
    tw.EnvironmentSpec.rademacher(), wide, n_list[:4],
    estimator="dp", gamma_source="reference", seed=11, tolerance=0.35,
)
print(f"  slope = {curved.fit.slope:8.4f}   predicted = {curved.predicted:8.4f}   "
      f"(about half the constant-tube magnitude)")
