import os
from dotenv import load_dotenv

load_dotenv()

class Settings:
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    ARTIFACT_DIR: str = os.getenv("ARTIFACT_DIR", "artifacts")
    API_HOST: str = os.getenv("API_HOST", "0.0.0.0")
    API_PORT: int = int(os.getenv("API_PORT", "8000"))

settings = Settings()
