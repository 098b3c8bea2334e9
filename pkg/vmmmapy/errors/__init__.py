from .cli_errors import *
from .numeric_errors import *
from .numeric_warnings import *
