from pydantic import BaseModel, ConfigDict


class SchemaBase(BaseModel):
    model_config = ConfigDict(from_attributes=True, populate_by_name=True)


class ConfigBase(BaseModel):
    """Configuration objects: unknown keys are rejected, values are validated."""

    model_config = ConfigDict(extra="forbid", frozen=True)
