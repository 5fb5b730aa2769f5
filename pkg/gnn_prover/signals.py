"""
Signals sent by the proof search.

Each is sent with the strategy class as ``sender`` and the current
``RoundState`` as ``state``:

``round_started``
    At the start of every round, before the strategy proposes
    instantiations.

``lemma_added``
    For every instantiation added to the ground part; extra arguments
    ``qe_id``, ``terms`` and ``clause``.

``search_finished``
    Once, when the search ends; extra argument ``result``.

"""

from django.dispatch import Signal

round_started = Signal()
lemma_added = Signal()
search_finished = Signal()
