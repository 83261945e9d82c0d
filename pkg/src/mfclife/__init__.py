import logging

REPORT_NAME_EXTEND = 20  # This many space between the name and the ':'.

RULE_ENVVAR = "CLI_DEFAULT_RULE"
BOUNDARY_ENVVAR = "CLI_DEFAULT_BOUNDARY"
PRESET_ENVVAR = "CLI_DEFAULT_PRESET"
VOLT_WINDOW_ENVVAR = "CLI_DEFAULT_VOLT_WINDOW"

CLI_DEFAULT_RULE_DEF = "B3/S23"
CLI_DEFAULT_BOUNDARY_DEF = "dead"
CLI_DEFAULT_PRESET_DEF = "circuit"
CLI_DEFAULT_VOLT_WINDOW_DEF = "2,7"


class MfcLifeError(Exception):
    """Base class for the errors raised by this package."""


def get_cli_envvar(envvar_name: str) -> str:
    import os

    var = os.environ.get(envvar_name, None)
    if var is not None:
        return var

    logging.getLogger("mfc_life.config").debug("The environment variable '%s' is not set. Using a default value.", envvar_name)
    return globals().get(envvar_name + "_DEF", "NO_DEFAULT")


class EnvironmentVariables:
    # NOTE: These are for autocomplete purposes.
    RULE = None
    BOUNDARY = None
    PRESET = None
    VOLT_WINDOW = None

    def __getattribute__(self, name):
        var_name = name + "_ENVVAR"
        return get_cli_envvar(globals().get(var_name, var_name))


ENVVARS = EnvironmentVariables()
