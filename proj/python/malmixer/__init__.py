"""Few-shot malware family classification with retrieval-augmented
semi-supervised learning.

The heavy lifting lives in the compiled ``_malmixer`` extension; this package
re-exports its surface. Installed wheels carry the extension inside the
package; development builds put it on PYTHONPATH as a top-level module.
"""

try:
    from malmixer._malmixer import *  # noqa: F401,F403
    from malmixer._malmixer import __version__  # noqa: F401
except ImportError:
    from _malmixer import *  # noqa: F401,F403
    from _malmixer import __version__  # noqa: F401
