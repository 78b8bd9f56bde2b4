# %% [markdown]
# # Building the symmetric kernel
# A degree-k kernel is a weighted sum of 2k+1 shifted central B-splines of
# order k+1.  The weights come from a small moment system.

# %%
import numpy as np

from siacline import SiacKernel, kernel_breakpoints, reproduction_residual, solve_kernel_coefficients

for k in range(4):
    print(k, np.round(solve_kernel_coefficients(k), 6))

# %% [markdown]
# The kernel reproduces polynomials up to degree 2k, so convolving it with
# x^p returns x^p.  Residuals sit at round-off.

# %%
K = SiacKernel(2, scaling=0.3)
print([f"{reproduction_residual(K, p):.1e}" for p in range(5)])

# %% [markdown]
# Break points: every knot of every shifted spline, merged.  Between two
# of them the kernel is a single polynomial, which is what makes exact
# Gauss quadrature possible.

# %%
print(kernel_breakpoints(SiacKernel(1)))
t = np.linspace(-2.5, 2.5, 11)
print(np.round(SiacKernel(1)(t), 4))
