"""Per-listing, per-aspect service quality scores from review text.

Pipelines: corpus ingest and cleaning, text normalization, entity
extraction, embedding-similarity word graphs clustered with Louvain, and
sentence-polarity aspect scoring.
"""
__version__ = "0.1.0"

from .aspects import AspectModel, DimensionModel, label_clusters, load_default_model, map_dimensions
from .corpus import Review, ReviewCorpus, clean_reviews, load_corpus, standardize_language, write_corpus
from .embeddings import EmbeddingStore, cosine, load_vectors, similarity_matrix
from .entities import EntityMention, EntityVocabulary, build_vocabulary, extract_mentions
from .lexnet import Partition, WordGraph, build_graph, louvain, modularity, prune_clusters
from .scoring import ScoreTable, SentimentLexicon, load_sentiment_lexicon, score_corpus, sentence_sentiment
from .textprep import ProcessedReview, Sentence, TextPipeline, preprocess, split_sentences, tokenize
