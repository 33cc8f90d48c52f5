import logging

import uvicorn

from app.config.settings import settings

if __name__ == "__main__":
    logging.basicConfig(level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))
    uvicorn.run("app.main:app", host=settings.API_HOST, port=settings.API_PORT, reload=True)
