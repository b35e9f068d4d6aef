"""
AVCleanse command line
"""

import click

from avcleanse.cli.boundary import fit_boundary_command
from avcleanse.cli.cleanse import cleanse_command, plot_data_command
from avcleanse.cli.data import synth_command
from avcleanse.cli.evaluate import eval_command
from avcleanse.cli.scoring import coarse_command, score_command
from avcleanse.core.config import settings


@click.group(name="avcleanse")
@click.version_option(settings.app_version, prog_name=settings.app_name)
def cli() -> None:
    """Audio-visual cleansing of noisy identity labels."""


cli.add_command(synth_command)
cli.add_command(score_command)
cli.add_command(coarse_command)
cli.add_command(fit_boundary_command)
cli.add_command(cleanse_command)
cli.add_command(eval_command)
cli.add_command(plot_data_command)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
