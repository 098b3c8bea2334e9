from .rng import *
from .model import *
from .field import *
from .montecarlo import *
