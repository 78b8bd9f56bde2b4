# %% [markdown]
# # A small convergence table
# Errors before and after filtering for P1 and P2 on 20x20 and 40x40
# meshes.  Orders are computed between consecutive meshes.

# %%
import math
from pathlib import Path

from siacline.filtering import FilterConfig
from siacline.harness import run_convergence_study

filters = [FilterConfig("tensor"), FilterConfig("line", math.pi / 4), FilterConfig("line", 3 * math.pi / 4)]
report = run_convergence_study("sinxy", ks=[1, 2], Ns=[20, 40], filters=filters)

for r in report.rows:
    order = "" if r.order is None else f"{r.order:5.2f}"
    print(f"P{r.k} N={r.N:<3d} {r.filter:<6} theta={r.theta:5.3f} mu={r.mu:5.3f}  {r.l2_error:.3e}  {order}")

# %%
out = Path("demo_output")
out.mkdir(exist_ok=True)
report.write_csv(out / "study.csv")
print("wrote", out / "study.csv")
