"""foodharvest: collect food images from the web, score and filter them with
a calibrated foodness threshold, and hand the survivors to a crowdsourced
review and bounding-box annotation service."""

__version__ = "0.1.0"
