from .commands import main
