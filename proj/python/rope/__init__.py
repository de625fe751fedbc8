"""Python facade over the native routing engine."""

from _rope import *  # noqa: F401,F403
