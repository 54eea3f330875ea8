"""
Flat ``key = value`` configuration files for the command line.

Blank lines and text after ``#`` are ignored. Keys are long flag names,
written with dashes or underscores (``batch-size`` and ``batch_size`` are the
same key). Values are given as they would be on the command line; list
flags take comma-separated values.
"""

import logging

from src.errors import ConfigError

logger = logging.getLogger(__name__)

TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


def normalise_key(key):
    return key.strip().lstrip("-").replace("-", "_")


def read_config(path):
    """
    Parse a configuration file.

    Args:
        path (str): File to read

    Returns:
        dict: Normalised key → raw string value

    Raises:
        ConfigError: On a line without '=' or a repeated key
        FileNotFoundError: If the file does not exist
    """
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{number}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            key = normalise_key(key)
            if key in values:
                raise ConfigError(f"{path}:{number}: key {key!r} given twice")
            values[key] = value.strip()
    logger.debug("read %d setting(s) from %s", len(values), path)
    return values


def apply_config(parser, values, reserved=("command", "config", "func", "help", "log_level")):
    """
    Install config values as defaults of a parser, so explicit flags still win.

    String defaults go through each argument's ``type``, like command-line text.

    Args:
        parser (argparse.ArgumentParser): Parser of the selected subcommand
        values (dict): Output of ``read_config``
        reserved (tuple): Destinations a config file may not set

    Raises:
        ConfigError: If a key is not a flag of the subcommand
    """
    actions = {action.dest: action for action in parser._actions if action.option_strings}
    for name in reserved:
        actions.pop(name, None)
    unknown = sorted(set(values) - set(actions))
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
    defaults = {}
    for key, value in values.items():
        # store_true flags bypass argparse type conversion
        defaults[key] = _switch(key, value) if actions[key].nargs == 0 else value
    parser.set_defaults(**defaults)


def _switch(key, value):
    lowered = value.lower()
    if lowered in TRUE_WORDS:
        return True
    if lowered in FALSE_WORDS:
        return False
    raise ConfigError(f"{key}: expected true or false, got {value!r}")
