from fastapi import HTTPException

from loopgauge.errors import InvalidStateError, LinkError, LoopGaugeError


def http_error(e: LoopGaugeError) -> HTTPException:
    if isinstance(e, InvalidStateError):
        status = 422
    elif isinstance(e, LinkError):
        status = 409
    else:
        status = 400
    return HTTPException(status_code=status, detail=e.to_dict())
