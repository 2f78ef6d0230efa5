"""
Django settings for genrankbench project.

Retrieval and reranking defaults live in the ``GENRANK`` dict at the bottom;
each entry can be overridden through the environment.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-genrankbench-local-experiments-only')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = os.environ.get('ALLOWED_HOSTS', 'localhost,127.0.0.1').split(',') if not DEBUG else []


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'rest_framework',
    'retrieval',
    'rerank',
    'pipelines',
    'evaluation',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'genrankbench.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'genrankbench.wsgi.application'


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Static files (CSS, JavaScript, Images)

STATIC_URL = 'static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging: key=value lines on stderr, one logger per app

LOG_LEVEL = os.environ.get('GENRANK_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'keyvalue': {
            'format': 'ts=%(asctime)s level=%(levelname)s logger=%(name)s msg="%(message)s"',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'keyvalue',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in ('retrieval', 'rerank', 'pipelines', 'evaluation', 'genrankbench')
    },
}


# REST Framework is used for config validation only
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
}


# Retrieval and reranking defaults
GENRANK = {
    'BASE_URL': os.environ.get('GENRANK_BASE_URL', 'http://localhost:8000'),
    'API_KEY_ENV': os.environ.get('GENRANK_API_KEY_ENV', 'GENRANK_API_KEY'),
    'TIMEOUT_MS': int(os.environ.get('GENRANK_TIMEOUT_MS', '60000')),
    'MAX_RETRIES': int(os.environ.get('GENRANK_MAX_RETRIES', '3')),
    'RETRY_BASE_MS': int(os.environ.get('GENRANK_RETRY_BASE_MS', '500')),
    'MAX_IN_FLIGHT': int(os.environ.get('GENRANK_MAX_IN_FLIGHT', '4')),
    'MODEL': os.environ.get('GENRANK_MODEL', 'gpt-4o-mini'),
    'PROMPT_VERSION': os.environ.get('GENRANK_PROMPT_VERSION', 'v1'),
    'PROMPT_TEMPLATE_DIR': BASE_DIR / 'rerank' / 'prompt_templates',
    'BM25_K1': 1.2,
    'BM25_B': 0.75,
    'RERANK_DEPTH': 100,
    'WINDOW_SIZE': 20,
    'STRIDE': 10,
    'MAX_DOC_TOKENS': 300,
    'K_EVAL': 10,
}
