from .grid import *
from .families import *
from .kernel import *
from .green_correlation import *
