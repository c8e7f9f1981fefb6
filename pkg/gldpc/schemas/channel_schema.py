from pydantic import BaseModel, Field


class SnrPoint(BaseModel):
    ebn0_db: float
    esn0_db: float
    sigma: float = Field(..., ge=0.0)
    rate: float = Field(..., gt=0.0, le=1.0)

    class Config:
        allow_mutation = False
