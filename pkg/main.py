#!/usr/bin/env python3
"""
Floquet Emitter - simulator and inverse-design toolkit for frequency-modulated
two-level quantum emitters

Computes sideband spectra, photon correlations, pulsed single-photon fidelity
and Ramsey interference, and optimises modulation waveforms for target spectra.
"""

import sys
from dotenv import load_dotenv

from src.app import main as cli_main
from src.errors import EXIT_UNEXPECTED
from src.logging_config import setup_logging, get_logger


def main():
    """Main function to run the command-line interface"""
    # Load environment variables
    load_dotenv()

    # Setup logging (reads LOG_LEVEL, LOG_FORMAT, LOG_FILE from env)
    setup_logging()
    logger = get_logger(__name__)

    try:
        code = cli_main(sys.argv[1:])
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        code = 130
    except Exception as e:
        logger.error(f"Fatal error: {e}")
        code = EXIT_UNEXPECTED
    sys.exit(code)


if __name__ == '__main__':
    main()
