"""
URL configuration for genrankbench project.

Experiments are driven from ``manage.py genrank_*`` commands; the admin is
the only web surface and lists stored evaluation records.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
