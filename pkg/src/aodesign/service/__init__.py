"""FastAPI service layer: pydantic schemas and the ASGI app."""
