#!/usr/bin/env python3
"""
Environment check for asymvol
This script will:
1. Check the Python version
2. Check dependencies
3. Create the default output directory
4. Verify the package imports
"""

import os
import sys
import logging
import importlib

def setup_logging():
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s'
    )

def check_python_version():
    """Check if Python version is compatible"""
    logger = logging.getLogger(__name__)
    
    if sys.version_info < (3, 8):
        logger.error(f"Python 3.8+ required, found {sys.version}")
        return False
    
    logger.info(f"✓ Python version: {sys.version}")
    return True

def check_dependencies():
    """Check if all required dependencies are installed"""
    logger = logging.getLogger(__name__)
    
    required_packages = [
        ('numpy', 'numpy'),
        ('scipy', 'scipy'),
        ('pandas', 'pandas'),
        ('tqdm', 'tqdm'),
        ('statsmodels', 'statsmodels'),
        ('pytest', 'pytest')
    ]
    
    missing_packages = []
    
    for package_name, pip_name in required_packages:
        try:
            __import__(package_name)
            logger.info(f"✓ {package_name} found")
        except ImportError:
            logger.error(f"✗ {package_name} not found")
            missing_packages.append(pip_name)
    
    if missing_packages:
        logger.error("Missing packages. Install them with:")
        logger.error(f"pip install {' '.join(missing_packages)}")
        return False
    
    return True

def create_output_directory():
    """Create the default output directory"""
    logger = logging.getLogger(__name__)
    
    if not os.path.exists('output'):
        os.makedirs('output', exist_ok=True)
        logger.info("✓ Created directory: output")
    else:
        logger.info("✓ Directory exists: output")

def verify_imports():
    """Import every asymvol module"""
    logger = logging.getLogger(__name__)
    
    modules = [
        'asymvol.config', 'asymvol.services.ingest', 'asymvol.services.measures',
        'asymvol.services.features', 'asymvol.services.estimation', 'asymvol.services.models',
        'asymvol.services.forecast', 'asymvol.services.evaluation', 'asymvol.services.diagnostics',
        'asymvol.services.simulator', 'asymvol.services.reporting', 'asymvol.cli'
    ]
    
    success = True
    for name in modules:
        try:
            importlib.import_module(name)
            logger.info(f"✓ {name} imported successfully")
        except Exception as e:
            logger.error(f"✗ Failed to import {name}: {e}")
            success = False
    
    return success

def check_defaults_file():
    """Load the bundled run defaults through RunConfig"""
    logger = logging.getLogger(__name__)
    
    try:
        from asymvol.config import Config, RunConfig
        rc = RunConfig.from_sources('pipeline', {}, Config.DEFAULTS_FILE)
        logger.info(f"✓ Defaults file loaded: window={rc.window}, bandwidth={rc.nw_bandwidth}")
        return True
    except Exception as e:
        logger.error(f"✗ Could not load asymvol/config/defaults.json: {e}")
        return False

def main():
    setup_logging()
    logger = logging.getLogger(__name__)
    
    logger.info("asymvol environment check")
    logger.info("=" * 50)
    
    if not check_python_version():
        sys.exit(1)
    
    if not check_dependencies():
        logger.error("Please install missing dependencies first")
        sys.exit(1)
    
    create_output_directory()
    
    logger.info("\nVerifying imports...")
    if not verify_imports():
        logger.error("Import verification failed")
        sys.exit(1)
    
    if not check_defaults_file():
        sys.exit(1)
    
    logger.info("\n" + "=" * 50)
    logger.info("✓ asymvol environment check completed successfully!")
    logger.info("\nNext steps:")
    logger.info("1. Simulate a market: python run_cli.py simulate --days 1300 --seed 7")
    logger.info("2. Run the pipeline: python run_cli.py pipeline output/market_ticks.csv")
    logger.info("3. Run the tests: pytest")

if __name__ == '__main__':
    main()
