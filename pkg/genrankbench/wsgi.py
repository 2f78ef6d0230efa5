"""
WSGI config for genrankbench project.

It exposes the WSGI callable as a module-level variable named ``application``.
Only the Django admin (experiment history) is served over HTTP.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'genrankbench.settings')

application = get_wsgi_application()
