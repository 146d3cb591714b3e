"""Automated judging of student programs against a reference implementation.

Symbolic-execution equivalence checking generates failing tests; an
active-learning gate skips checks for submissions that confidently look
like already-verified correct strategies.
"""

__version__ = "0.1.0"
