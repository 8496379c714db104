"""
Flask Entry Point for the Certificate Verification Service
==========================================================
Creates the coarsegraph verification app and serves it on PORT.

Endpoints:
- GET  /health                    : Health check
- GET  /api/status                : Version and limits
- POST /api/verify-model          : Fat minor model certificate
- POST /api/check-qi              : Quasi-isometry map certificate
- POST /api/tree-decomp/validate  : Tree decomposition certificate
- POST /api/spread-paths/verify   : Spread path certificate
"""

import logging

from coarsegraph.config import get_settings
from coarsegraph.service import create_app

logger = logging.getLogger(__name__)

app = create_app()


if __name__ == '__main__':
    settings = get_settings()
    logging.basicConfig(level=settings.log_level, format="%(levelname)s %(name)s: %(message)s")
    logger.warning("Serving coarsegraph verification API on port %d", settings.port)

    app.run(
        host='0.0.0.0',  # Listen on all interfaces for containerized deployment
        port=settings.port,
        debug=False,
        use_reloader=False
    )
