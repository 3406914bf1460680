"""HTTP service over the circularity engine.

The ASGI instance lives at ``circmat.service.app:app`` for uvicorn; import
``create_app`` here to build one programmatically.
"""

from .app import create_app

__all__ = ["create_app"]
