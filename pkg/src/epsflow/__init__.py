"""Finite-difference solver and verification toolkit for the axisymmetric eps-model
of the 3D Navier-Stokes equations in (u1, omega1, phi1) variables."""
from .config import ConfigError, RunConfig, dump_config, load_config, parse_config
from .diagnostics import (CSV_COLUMNS, DiagnosticsRecord, MonitorConfig, criteria_monitor, energy,
                          energy_identity_residual, gamma_evolution_residual, gamma_field,
                          rescaled_velocity, scaling_transform, support_escape)
from .dynamics import InstabilityError, StepControl, Velocity, biot_savart, cfl_dt, divergence, evolve, rhs, step_rk4
from .elliptic import SingularSystemError, apply_L, grad, lemma2_ratios, solve_phi
from .grid import GridSpec, ModelParams, ScalarField, State, integrate, make_grid, sup_norm, weighted_lp_norm
from .inequalities import (C_DEFAULT, HardyCase, cutoff_psi, hardy_sides, interp_check, lemma3_constant,
                           lemma3_sides)
from .initial import ICSpec, SupportError, make_ic
from .runner import run, sweep
from .snapshot import read_snapshot, write_snapshot

__version__ = "0.1.0"
