import os

from fastapi import FastAPI

from foonc import __version__
from foonc.log import configure_logging
from foonc.routers import planning

configure_logging()

app = FastAPI(title="FOON task planner", version=__version__)

app.include_router(planning.router)


@app.get("/")
def read_root():
    return {"message": "FOON task planner is running"}


if __name__ == "__main__":
    import uvicorn

    port = int(os.environ.get("PORT", 8080))
    uvicorn.run("foonc.main:app", host="0.0.0.0", port=port, reload=False)
