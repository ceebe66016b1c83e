from dotenv import load_dotenv
load_dotenv()

import structlog
from fastapi import FastAPI

from loopgauge.api import states, twist, verify
from loopgauge.config import configure_logging, get_settings
from loopgauge.db.database import init_db

logger = structlog.get_logger()

app = FastAPI(title="Loop Gauge")


@app.on_event("startup")
def startup_event():
    configure_logging(get_settings().log_level)
    init_db()


app.include_router(states.router)
app.include_router(twist.router)
app.include_router(verify.router)


@app.get("/health")
def health_check():
    return {"status": "ok"}
