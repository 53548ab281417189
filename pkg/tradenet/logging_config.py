import logging
import os

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

LOG_LEVEL = os.getenv("TRADENET_LOG_LEVEL", "WARNING").upper()

# Create a logger
logger = logging.getLogger('tradenet')
logger.setLevel(LOG_LEVEL)

# Create console handler and set level from the environment
ch = logging.StreamHandler()
ch.setLevel(LOG_LEVEL)

# Create formatter and add it to the handler
formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
ch.setFormatter(formatter)

# Add the handler to the logger
if not logger.handlers:
    logger.addHandler(ch)
