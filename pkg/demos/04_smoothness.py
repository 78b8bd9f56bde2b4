# %% [markdown]
# # Smoothness along cuts
# Pointwise error profiles of a P3 solution along three cuts.  The axis
# line filter (theta = 0) only smooths along x, so the vertical profile
# keeps its element-scale oscillation.  The 3pi/4 filter smooths in every
# direction.

# %%
import math

from siacline.filtering import FilterConfig
from siacline.harness import exact_solution, run_slices, solve_case, total_variation

uh = solve_case("sinxy", k=3, N=20)
filters = [FilterConfig("line", 0.0, 1.0), FilterConfig("line", 3 * math.pi / 4)]
for prof in run_slices(uh, exact_solution("sinxy", 2.0), filters):
    tv = {name: total_variation(err) for name, err in prof.errors.items()}
    ratios = ", ".join(f"{n}: {v / tv['dg']:.2e}" for n, v in tv.items() if n != "dg")
    print(f"{prof.cut:<10} TV relative to DG -> {ratios}")
