"""Weak measurements with pre/postselection, including the probe's own dynamics."""

from .engine import (MeasurementSetup, PointerDistribution, PointerGrid, WeakValueReport,
                     conditional_distribution, inferred_average, inferred_variance,
                     joint_density, velocity_expectation_weak, weak_average_approx,
                     weak_value, weak_variance_approx)
from .errors import (ConfigError, DegenerateGeometryError, InvalidProbeError,
                     NumericalAssertionError, OrthogonalPostselectionError, PhysicsDomainError,
                     RegimeNotApplicableError, ValidationError, VanishingPostselectionError,
                     WeakMeterError)
from .probe import (CouplingWindow, GaussianProbe, PhaseMoments, beta, coupling_moments,
                    derived_scales, g_function, phase_phi, rho_elem)
from .quantum_core import (ObservableOp, SystemState, bloch_to_spinor, eigh, evolve_state,
                           spin_observable)
from .spin import SpinGeometry, SpinScenario

__version__ = "0.1.0"
