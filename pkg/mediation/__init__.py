from .pipeline import run_chima, ChimaResult


__title__ = 'mediation'
__version__ = '0.1'
