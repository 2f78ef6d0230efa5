from django.contrib import admin

from .models import EvaluationRecord


@admin.register(EvaluationRecord)
class EvaluationRecordAdmin(admin.ModelAdmin):
    list_display = ['run_name', 'k', 'mean_ndcg', 'evaluated_queries', 'created_at']
    list_filter = ['k', 'created_at']
    search_fields = ['run_name', 'run_path']
    readonly_fields = ['created_at']
