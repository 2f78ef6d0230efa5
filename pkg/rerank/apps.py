from django.apps import AppConfig


class RerankConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'rerank'
    verbose_name = 'Generative reranking'
