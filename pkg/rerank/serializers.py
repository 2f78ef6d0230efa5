from django.conf import settings
from rest_framework import serializers

from .backends import BackendConfig
from .prompts import TruncationPolicy
from .rerankers import STRATEGIES, RerankerConfig

BACKEND_KINDS = ['http', 'oracle']


def _genrank(key):
    return lambda: settings.GENRANK[key]


class BackendConfigSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=BACKEND_KINDS, default='http')
    base_url = serializers.URLField(default=_genrank('BASE_URL'))
    api_key_env = serializers.RegexField(r'^[A-Za-z_][A-Za-z0-9_]*$', default=_genrank('API_KEY_ENV'))
    timeout_ms = serializers.IntegerField(min_value=1, default=_genrank('TIMEOUT_MS'))
    max_retries = serializers.IntegerField(min_value=0, default=_genrank('MAX_RETRIES'))
    retry_base_ms = serializers.IntegerField(min_value=1, default=_genrank('RETRY_BASE_MS'))
    max_in_flight = serializers.IntegerField(min_value=1, default=_genrank('MAX_IN_FLIGHT'))

    def to_internal_value(self, data):
        if isinstance(data, dict) and 'api_key' in data:
            raise serializers.ValidationError(
                {'api_key': 'api keys are read from the environment only; use api_key_env'}
            )
        return super().to_internal_value(data)

    @staticmethod
    def build(validated_data) -> BackendConfig:
        data = dict(validated_data)
        data.pop('kind', None)
        return BackendConfig(**data)


class RerankerConfigSerializer(serializers.Serializer):
    strategy = serializers.ChoiceField(choices=list(STRATEGIES), default='listwise')
    rerank_depth = serializers.IntegerField(min_value=1, default=_genrank('RERANK_DEPTH'))
    window_size = serializers.IntegerField(min_value=1, max_value=100, default=_genrank('WINDOW_SIZE'))
    stride = serializers.IntegerField(min_value=1, default=_genrank('STRIDE'))
    model = serializers.CharField(max_length=200, default=_genrank('MODEL'))
    max_doc_tokens = serializers.IntegerField(min_value=1, default=_genrank('MAX_DOC_TOKENS'))
    passes = serializers.IntegerField(min_value=1, default=1)
    max_grade = serializers.IntegerField(min_value=1, default=3)
    temperature = serializers.FloatField(min_value=0.0, default=0.0)
    max_tokens = serializers.IntegerField(min_value=1, allow_null=True, default=None)
    concurrency = serializers.IntegerField(min_value=1, allow_null=True, default=None)

    def validate(self, attrs):
        if attrs['stride'] > attrs['window_size']:
            raise serializers.ValidationError(
                {'stride': f"stride {attrs['stride']} exceeds window_size {attrs['window_size']}"}
            )
        if attrs['strategy'] == 'listwise' and attrs['window_size'] < 2:
            raise serializers.ValidationError({'window_size': 'listwise windows hold at least 2 documents'})
        return attrs

    @staticmethod
    def build(validated_data) -> RerankerConfig:
        data = dict(validated_data)
        data['truncation'] = TruncationPolicy(max_doc_tokens=data.pop('max_doc_tokens'))
        return RerankerConfig(**data)
