# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Turns library failures into console messages and process exit codes.
"""

import functools
import sys

from .errors import PipelocError
from .utils import error_console


def error_handling(func):
    """
    Wraps a command entry point.

    A `PipelocError` exits with the code its class declares; anything else,
    and Ctrl+C/Ctrl+D, exits with 1.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (KeyboardInterrupt, EOFError):
            error_console.print("[red]\n-> [ERROR] Interrupted By The User")
            sys.exit(1)
        except PipelocError as e:
            error_console.print(f"[bold red][ERROR][/bold red] -> {e}", highlight=False)
            sys.exit(e.exit_code)
        except Exception as e:
            # Anything unexpected (file permissions, a full disk, ...).
            error_console.print(f"[bold red][ERROR][/bold red] -> {e}", highlight=False)
            sys.exit(1)

    return wrapper
