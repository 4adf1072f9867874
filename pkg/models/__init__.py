"""Result and configuration dataclasses."""
