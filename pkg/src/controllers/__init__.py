from .experiment_controller import (
    simulate,
    estimate_exponent,
    sweep,
    check,
    list_presets,
    EXIT_OK,
    EXIT_CONFIG,
    EXIT_NUMERICAL,
)

__all__ = ['simulate', 'estimate_exponent', 'sweep', 'check', 'list_presets', 'EXIT_OK', 'EXIT_CONFIG', 'EXIT_NUMERICAL']
