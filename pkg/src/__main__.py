import logging
import sys

from dotenv import load_dotenv

from .nmqj import app

logging.basicConfig(level=logging.INFO)

load_dotenv()

sys.exit(app.run())
