"""decomind: room-design generation pipeline.

Turns a room specification (type, style, dimensions, openings, furniture
categories) into a layout-conditioned generated interior design, scores the
result against the requested room type and style, and exposes the loop through
an API, CLI, and browser UI.
"""

__version__ = "0.1.0"
