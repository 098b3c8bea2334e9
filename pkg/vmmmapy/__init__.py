"""Volatility modulated mixed moving average random fields: simulation, analytics and Lamperti transforms"""

from .errors import *
from .levy import *
from .kernels import *
from .fourier import *
from .simulate import *
from .analytics import *
from .lamperti import *
