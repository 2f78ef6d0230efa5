from django.db import models

from .metrics import EvalResult


class EvaluationRecord(models.Model):
    run_name = models.CharField(max_length=200)
    k = models.PositiveIntegerField(default=10)
    mean_ndcg = models.FloatField(null=True, blank=True)
    evaluated_queries = models.PositiveIntegerField(default=0)
    skipped_queries = models.JSONField(default=list, blank=True)
    per_query = models.JSONField(default=dict, blank=True)
    run_path = models.CharField(max_length=500, blank=True)
    qrels_path = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', '-id']

    def __str__(self):
        score = 'n/a' if self.mean_ndcg is None else f'{self.mean_ndcg:.3f}'
        return f"{self.run_name} nDCG@{self.k}={score}"

    @classmethod
    def from_result(cls, run_name: str, result: EvalResult, **extra) -> 'EvaluationRecord':
        return cls.objects.create(
            run_name=run_name,
            k=result.k,
            mean_ndcg=result.mean,
            evaluated_queries=result.evaluated,
            skipped_queries=list(result.skipped_queries),
            per_query=dict(result.per_query),
            **extra,
        )

    def to_result(self) -> EvalResult:
        return EvalResult(
            per_query=dict(self.per_query),
            mean=self.mean_ndcg,
            k=self.k,
            skipped_queries=list(self.skipped_queries),
        )

    @classmethod
    def latest_per_run(cls, k: int = None):
        """Newest record for each run name, oldest run first."""
        records = cls.objects.all()
        if k is not None:
            records = records.filter(k=k)
        latest = {}
        for record in records.order_by('created_at', 'id'):
            latest.pop(record.run_name, None)
            latest[record.run_name] = record
        return latest
