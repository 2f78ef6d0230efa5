# Generated by Django 5.2.4 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='EvaluationRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('run_name', models.CharField(max_length=200)),
                ('k', models.PositiveIntegerField(default=10)),
                ('mean_ndcg', models.FloatField(blank=True, null=True)),
                ('evaluated_queries', models.PositiveIntegerField(default=0)),
                ('skipped_queries', models.JSONField(blank=True, default=list)),
                ('per_query', models.JSONField(blank=True, default=dict)),
                ('run_path', models.CharField(blank=True, max_length=500)),
                ('qrels_path', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at', '-id'],
            },
        ),
    ]
