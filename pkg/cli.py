"""
Línea de comandos del planificador MIG

    python cli.py compare --scenario data/scenarios/sample/scenario.yaml --out Output
"""
from app.cli import cli

if __name__ == "__main__":
    cli()
