"""Harmonic analysis on the closed q-lattice plane: measure, q-difference
calculus, differential forms, quantum exponential and Fourier transform."""

from .lattice import CirclePoint, EmptyWindowError, QLattice, chi, integrate_haar_gamma, mu_weight
from .modes import (AliasingError, ModeFunction, SampledFunction, basis, conjugate, from_samples,
                    inner_product, integrate_mu, multiply, random_mode_function, to_samples)
from .calculus import OperatorId, adjoint_residual, mult_coord, q_diff, shift, sigma
from .forms import Form1, Form2, commute_through, d0, d1, to_omega_frame
from .qexp import FqEvaluator, PoleError
from .fourier import (FourierData, WindowError, build_fourier_data, fourier_adjoint_apply, fourier_apply,
                      fourier_direct_quadrature, plancherel_residual, relation_residual, unitarity_defect)
from .verify import Report, VerifyConfig, run_verify

__all__ = [
    "CirclePoint", "EmptyWindowError", "QLattice", "chi", "integrate_haar_gamma", "mu_weight",
    "AliasingError", "ModeFunction", "SampledFunction", "basis", "conjugate", "from_samples",
    "inner_product", "integrate_mu", "multiply", "random_mode_function", "to_samples",
    "OperatorId", "adjoint_residual", "mult_coord", "q_diff", "shift", "sigma",
    "Form1", "Form2", "commute_through", "d0", "d1", "to_omega_frame",
    "FqEvaluator", "PoleError",
    "FourierData", "WindowError", "build_fourier_data", "fourier_adjoint_apply", "fourier_apply",
    "fourier_direct_quadrature", "plancherel_residual", "relation_residual", "unitarity_defect",
    "Report", "VerifyConfig", "run_verify",
]
