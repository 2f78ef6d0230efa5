from pathlib import Path

from django.conf import settings
from rest_framework import serializers

from rerank.serializers import BackendConfigSerializer, RerankerConfigSerializer

STAGE_NAMES = ['bm25', 'run_file', 'get_text', 'rerank', 'cut', 'identity']


class StageSpecSerializer(serializers.Serializer):
    stage = serializers.ChoiceField(choices=STAGE_NAMES)
    k = serializers.IntegerField(min_value=1, required=False)
    k1 = serializers.FloatField(min_value=0.0, required=False)
    b = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    path = serializers.CharField(required=False)

    def validate(self, attrs):
        if attrs['stage'] == 'cut' and 'k' not in attrs:
            raise serializers.ValidationError({'k': 'a cut stage needs k'})
        if attrs['stage'] == 'run_file' and 'path' not in attrs:
            raise serializers.ValidationError({'path': 'a run_file stage needs a path'})
        return attrs


def default_stages():
    return [{'stage': 'bm25', 'k': 100}, {'stage': 'get_text'}, {'stage': 'rerank'}]


class RunConfigSerializer(serializers.Serializer):
    corpus_path = serializers.CharField(allow_null=True, default=None)
    index_path = serializers.CharField(allow_null=True, default=None)
    queries_path = serializers.CharField(allow_null=True, default=None)
    qrels_path = serializers.CharField(allow_null=True, default=None)
    output_run_path = serializers.CharField(allow_null=True, default=None)
    metadata_path = serializers.CharField(allow_null=True, default=None)
    report_csv_path = serializers.CharField(allow_null=True, default=None)
    run_tag = serializers.RegexField(r'^\S+$', default='genrank')
    k_eval = serializers.IntegerField(min_value=1, default=lambda: settings.GENRANK['K_EVAL'])
    workers = serializers.IntegerField(min_value=1, default=1)
    continue_on_error = serializers.BooleanField(default=False)
    backend = BackendConfigSerializer()
    reranker = RerankerConfigSerializer()
    pipeline = StageSpecSerializer(many=True, allow_empty=False)

    # inputs that must already exist when a config is loaded
    EXISTING_PATHS = ('corpus_path', 'queries_path', 'qrels_path')

    def validate(self, attrs):
        errors = {}
        for name in self.EXISTING_PATHS:
            value = attrs.get(name)
            if value and not Path(value).exists():
                errors[name] = f"no such file: {value}"
        for position, spec in enumerate(attrs['pipeline']):
            if spec['stage'] == 'run_file' and not Path(spec['path']).exists():
                errors[f'pipeline[{position}].path'] = f"no such file: {spec['path']}"
        if attrs['pipeline'] and attrs['pipeline'][0]['stage'] not in ('bm25', 'run_file'):
            errors['pipeline'] = 'the first stage must be bm25 or run_file'
        if errors:
            raise serializers.ValidationError(errors)
        return attrs
