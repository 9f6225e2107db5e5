# Colour codes and small printing helpers for the poolrate terminal output.
import sys


class tcols:
    """ANSI colour codes used to make the solver and pipeline messages readable
    in a terminal.
    """

    HEADER = "\033[95m"
    OKBLUE = "\033[94m"
    OKCYAN = "\033[96m"
    OKGREEN = "\033[92m"
    WARNING = "\033[93m"
    FAIL = "\033[91m"
    ENDC = "\033[0m"
    BOLD = "\033[1m"
    UNDERLINE = "\033[4m"
    SPARKS = "\U00002728"


def print_header(title: str):
    """Prints a bold section title, e.g. the name of a pipeline stage."""
    print(tcols.HEADER + tcols.BOLD + f"\n{title}" + tcols.ENDC)


def print_warning(message: str):
    print(tcols.WARNING + "Warning: " + message + tcols.ENDC)


def print_failure(message: str):
    """Prints an error message on standard error."""
    print(tcols.FAIL + message + tcols.ENDC, file=sys.stderr)
