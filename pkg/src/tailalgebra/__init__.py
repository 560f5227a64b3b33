"""Static tail analysis for probabilistic programs.

Densities are classified by their asymptotic form ``c x**nu exp(-sigma x**rho)``
and these classes are propagated through the operations of a program, so that
tail behaviour is known before anything is sampled.
"""

from importlib import resources

from .catalog import AtomicDistribution, class_of, family, logpdf, sample
from .dsl import analyze, compile_model, parse, to_source
from .errors import *  # noqa: F401,F403
from .posterior import PosteriorQuery, posterior, posterior_class
from .representative import RepresentativeConfig, representative
from .streams import Stream
from .tails import (SUPER_HEAVY, SUPER_LIGHT, Flag, GenGamma, Ordering, RegularlyVarying,
                    SuperHeavy, SuperLight, canonicalize, compare)

__version__ = "0.1.0"


def model_source(name: str) -> str:
    """Text of a bundled example model (``name`` without the .gga suffix)."""
    return resources.files(__package__).joinpath("models", f"{name}.gga").read_text("utf-8")


def bundled_models():
    return sorted(p.name[:-4] for p in resources.files(__package__).joinpath("models").iterdir()
                  if p.name.endswith(".gga"))
