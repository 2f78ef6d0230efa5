import logging
from pathlib import Path

from django.core.management.base import CommandError

from genrankbench.commands import EXIT_CONFIG, GenRankCommand
from retrieval.corpus import load_corpus
from retrieval.index import build_index, save_index

logger = logging.getLogger(__name__)


class Command(GenRankCommand):
    help = 'Build a BM25 inverted index from a corpus file and save it as JSON'

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        self.add_path_arguments(parser, 'corpus', 'index')
        parser.add_argument('--force', action='store_true', help='overwrite an existing index file')

    def run(self, *args, **options):
        config = self.load_config(options)
        config.require('corpus_path', 'index_path')
        if Path(config.index_path).exists() and not options['force']:
            raise CommandError(f"{config.index_path} exists; pass --force to overwrite", returncode=EXIT_CONFIG)

        index = build_index(load_corpus(config.corpus_path))
        save_index(index, config.index_path)
        self.stdout.write(
            f"indexed N={index.num_docs} avgdl={index.avg_doc_length:.2f} "
            f"vocabulary={index.vocabulary_size} -> {config.index_path}"
        )
