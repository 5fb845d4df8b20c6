"""Worked systems: mixed wave/mode solitons, a curl-force system and the Loewner system."""

from .ex1 import Example1Config, example1_family, example1_system
from .ex2 import Example2Config, example2_family, example2_system
from .ex3 import Example3Config, example3_family, example3_systems, resolve_denominator
from .special import jacobi_cn, jacobi_dn, jacobi_ellipj, jacobi_sn
