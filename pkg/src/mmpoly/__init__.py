from ._backend import BACKEND
