"""
Perturbation Forcing
Right-hand sides of the co-moving perturbation equations and the modulation
rate system, assembled on raw coefficient arrays for use inside Runge-Kutta
stages

Frame: y = x - int_0^t c - gamma(t), u = psi_{c(t)}(y) + v(y, t), w = e^{ay} v.

    v_t = d(-d^2 + c0 - 2 psi_c) v - d(v^2) + gdot psi_c' - cdot d_c psi_c + (gdot + c - c0) d v
    w_t = A_{a,c0} w + F
    F   = -2 (d-a)((psi_c - psi_c0) w) - (d-a)(v w) + (c - c0 + gdot)(d-a) w
          + gdot e^{ay} psi_c' - cdot e^{ay} d_c psi_c

The rates (gdot, cdot) are chosen so that P F = 0. The stepper advances w by
Q(A w + F), which equals A w + F while P w = 0 and keeps <w, eta_i> fixed for
the discrete system as well. eta_1 need not vanish at the window ends (it tends
to a constant when a = 0), so the discrete <A w, eta_i> is not zero by itself.
"""

from typing import NamedTuple, Optional

import numpy as np

from kdvlab.core.config import settings
from kdvlab.core.errors import ModulationConditionError, ParameterError
from kdvlab.spectral.grid import dealias_mask, derivative_symbol
from kdvlab.spectral.linearized_operator import SpectralPackage, constant_symbol
from kdvlab.spectral.soliton import profile_values


class SolitonTerms(NamedTuple):
    psi: np.ndarray
    dpsi: np.ndarray
    dcpsi: np.ndarray
    dpsi_weighted: np.ndarray
    dcpsi_weighted: np.ndarray


class RateSolution(NamedTuple):
    gammadot: float
    cdot: float
    matrix: np.ndarray
    condition_number: float


class PerturbationModel:
    """
    Symbols, soliton samples and right-hand sides for one (c0, a, grid)

    Only the quadratic perturbation products v^2 and v w are dealiased; terms
    linear in the perturbation are assembled exactly as in apply_Aa so that the
    kernel functions stay discrete eigenfunctions.
    """

    def __init__(self, package: SpectralPackage, dealias_on: bool = True,
                 condition_limit: Optional[float] = None):
        self.package = package
        self.grid = package.grid
        self.c0 = package.params.speed
        self.a = package.params.weight
        self.dx = self.grid.spacing
        self.condition_limit = settings.CONDITION_LIMIT if condition_limit is None else condition_limit

        self.d_symbol = derivative_symbol(self.grid, 1)
        self.shift_symbol = derivative_symbol(self.grid, 1, shift=self.a)
        self.v_linear = self.d_symbol * (self.c0 - self.d_symbol**2)
        self.w_linear = constant_symbol(self.grid, package.params)
        self.mask = dealias_mask(self.grid) if dealias_on else None

        self.psi0 = profile_values("psi", self.c0, self.grid.points)
        self.eta = np.vstack([package.eta1.values, package.eta2.values])
        self.eta_tilde = np.vstack([package.eta1_tilde.values, package.eta2_tilde.values])
        self.zeta = np.vstack([package.zeta1.values, package.zeta2.values])

    # --- helpers ---------------------------------------------------------------

    def real(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifft(coeffs).real

    def product_hat(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        coeffs = np.fft.fft(f * g)
        return coeffs * self.mask if self.mask is not None else coeffs

    def soliton_terms(self, c: float) -> SolitonTerms:
        if not c > 0:
            raise ParameterError(f"modulated speed left the admissible range: c={c}")
        y = self.grid.points
        return SolitonTerms(
            psi=profile_values("psi", c, y),
            dpsi=profile_values("dpsi_dy", c, y),
            dcpsi=profile_values("dpsi_dc", c, y),
            dpsi_weighted=profile_values("dpsi_dy", c, y, self.a),
            dcpsi_weighted=profile_values("dpsi_dc", c, y, self.a),
        )

    def constraint_coefficients(self, w: np.ndarray) -> np.ndarray:
        """(<w, eta_1>, <w, eta_2>)"""
        return self.dx * (self.eta @ w)

    def project_q(self, f: np.ndarray) -> np.ndarray:
        return f - self.constraint_coefficients(f) @ self.zeta

    def kernel_part(self, f_hat: np.ndarray) -> np.ndarray:
        """P f in coefficient space"""
        return np.fft.fft(self.constraint_coefficients(self.real(f_hat)) @ self.zeta)

    # --- weighted equation -----------------------------------------------------

    def a_times_w(self, w_hat: np.ndarray, w: np.ndarray) -> np.ndarray:
        """A_{a,c0} w in coefficient space"""
        return self.w_linear * w_hat - 2.0 * self.shift_symbol * np.fft.fft(self.psi0 * w)

    def free_forcing(self, w_hat: np.ndarray, w: np.ndarray, v: np.ndarray, c: float,
                     terms: SolitonTerms) -> np.ndarray:
        """The part of F that does not multiply a modulation rate"""
        s = self.shift_symbol
        return (-2.0 * s * np.fft.fft((terms.psi - self.psi0) * w)
                - s * self.product_hat(v, w)
                + (c - self.c0) * s * w_hat)

    def rate_matrix(self, w_hat: np.ndarray, terms: SolitonTerms) -> np.ndarray:
        """
        Matrix of the rate system, second row negated so that it tends to the identity

        Columns multiply (gdot, cdot).
        """
        dw = self.real(self.shift_symbol * w_hat)
        gamma_column = self.dx * (self.eta_tilde @ terms.dpsi + self.eta @ dw)
        speed_column = -self.dx * (self.eta_tilde @ terms.dcpsi)
        matrix = np.column_stack([gamma_column, speed_column])
        matrix[1] *= -1.0
        return matrix

    def solve_rates(self, w_hat: np.ndarray, w: np.ndarray, v: np.ndarray, c: float,
                    terms: Optional[SolitonTerms] = None) -> RateSolution:
        """
        Solve for (gdot, cdot) with <F, eta_i> = 0

        Raises:
            ModulationConditionError: the matrix condition number exceeds the limit
        """
        terms = self.soliton_terms(c) if terms is None else terms
        matrix = self.rate_matrix(w_hat, terms)
        condition = float(np.linalg.cond(matrix))
        if not np.isfinite(condition) or condition > self.condition_limit:
            raise ModulationConditionError("Modulation matrix is ill-conditioned", condition)
        drive = self.real(self.free_forcing(w_hat, w, v, c, terms))
        rhs = -self.constraint_coefficients(drive)
        rhs[1] *= -1.0
        gammadot, cdot = np.linalg.solve(matrix, rhs)
        return RateSolution(float(gammadot), float(cdot), matrix, condition)

    def w_forcing(self, w_hat: np.ndarray, w: np.ndarray, v: np.ndarray, c: float,
                  gammadot: float, cdot: float, terms: SolitonTerms, project: bool = True) -> np.ndarray:
        """Q F (or F when project is False) in coefficient space"""
        forcing = (self.free_forcing(w_hat, w, v, c, terms)
                   + gammadot * (self.shift_symbol * w_hat + np.fft.fft(terms.dpsi_weighted))
                   - cdot * np.fft.fft(terms.dcpsi_weighted))
        if not project:
            return forcing
        return np.fft.fft(self.project_q(self.real(forcing)))

    def w_coupling(self, w: np.ndarray) -> np.ndarray:
        """-2 (d - a)(psi_c0 w), the variable-coefficient part of A_{a,c0}"""
        return -2.0 * self.shift_symbol * np.fft.fft(self.psi0 * w)

    def w_rhs(self, w_hat: np.ndarray, w: np.ndarray, v: np.ndarray, c: float,
              gammadot: float, cdot: float, terms: SolitonTerms, project: bool = True) -> np.ndarray:
        """
        Everything in the w-equation except the constant-coefficient symbol

        With project, the result plus w_linear * w_hat is Q(A w + F); otherwise A w + F.
        """
        rhs = self.w_coupling(w) + self.w_forcing(w_hat, w, v, c, gammadot, cdot, terms, project=project)
        if project:
            rhs = rhs - self.kernel_part(self.a_times_w(w_hat, w))
        return rhs

    # --- unweighted equation ---------------------------------------------------

    def v_forcing(self, v_hat: np.ndarray, v: np.ndarray, c: float, gammadot: float, cdot: float,
                  terms: SolitonTerms, nonlinear: bool = True) -> np.ndarray:
        """Everything in the v-equation except d(-d^2 + c0) v"""
        d = self.d_symbol
        rhs = (-2.0 * d * np.fft.fft(terms.psi * v)
               + (gammadot + c - self.c0) * d * v_hat
               + gammadot * np.fft.fft(terms.dpsi)
               - cdot * np.fft.fft(terms.dcpsi))
        if nonlinear:
            rhs = rhs - d * self.product_hat(v, v)
        return rhs
