from __future__ import annotations

import os
import sys

# make `import oracles` work no matter how pytest was invoked
sys.path.insert(0, os.path.dirname(__file__))
