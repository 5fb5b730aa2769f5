"""
Instantiation strategies and the registry the command surface uses to
look them up by name.

A strategy is a subclass of ``InstantiationStrategy`` whose
``instantiate`` method receives the current ``RoundState`` and returns
the ``(qe_id, terms)`` pairs to add this round. Behaviour is configured
by overriding class attributes, in the same way for every strategy.

Example
-------

Registering a strategy which e-matches with a smaller cap::

    from gnn_prover.strategies import EMatchingInstantiation, registry

    class CappedEMatching(EMatchingInstantiation):
        match_cap = 10

    registry.register('capped-ematch', CappedEMatching)

"""

import logging

import numpy as np

from gnn_prover.ematching import ematch_round
from gnn_prover.engine import check_deadline
from gnn_prover.enumeration import enum_round
from gnn_prover.exceptions import AlreadyRegistered, NotRegistered
from gnn_prover.export import export_graph
from gnn_prover.guidance import GuidanceConfig, GuidanceMode, guided_round

logger = logging.getLogger(__name__)


class InstantiationStrategy(object):
    """
    Encapsulates one way of choosing instantiations each round.

    ``needs_weights``
        Whether the strategy must be given trained ``GnnParameters``.
        Defaults to ``False``.

    Strategies may keep per-run state (a random generator, for
    example), so a fresh instance is used for each search.

    """
    needs_weights = False

    def __init__(self, params=None, config=None):
        self.params = params
        self.config = config

    def instantiate(self, state):
        raise NotImplementedError

    def done(self, state):
        return dict((qe.qe_id, qe.done_instantiations) for qe in state.asserted_qes)


class EnumerativeInstantiation(InstantiationStrategy):
    """
    One new tuple per quantified expression per round, in age order.

    """
    def instantiate(self, state):
        return enum_round(state.asserted_qes, state.bank, self.done(state))


class EMatchingInstantiation(InstantiationStrategy):
    """
    Every new trigger match of the round.

    ``match_cap``
        Maximum number of instantiations per quantified expression per
        round; ``None`` reads the ``GNN_PROVER_MATCH_CAP`` setting.

    """
    match_cap = None

    def instantiate(self, state):
        return ematch_round(state.asserted_qes, state.egraph, state.bank, self.done(state), self.match_cap,
                            state.deadline)


class DefaultInstantiation(EMatchingInstantiation):
    """
    E-matching, with one enumerative round whenever e-matching has
    nothing new to offer.

    """
    def instantiate(self, state):
        proposals = super(DefaultInstantiation, self).instantiate(state)
        if proposals:
            return proposals
        logger.debug("Round %d: e-matching exhausted, enumerating", state.round_index)
        return enum_round(state.asserted_qes, state.bank, self.done(state))


class GuidedInstantiation(InstantiationStrategy):
    """
    Instantiation driven by the network's scores.

    ``mode``
        The ``GuidanceMode`` to run in; subclasses fix it.

    """
    needs_weights = True
    mode = GuidanceMode.THRESHOLD

    def __init__(self, params=None, config=None):
        if params is None:
            raise ValueError("%s needs trained network parameters" % self.__class__.__name__)
        if config is None:
            config = GuidanceConfig(self.mode)
        elif config.mode != self.mode:
            config = GuidanceConfig(self.mode, config.threshold, config.max_inst_per_qe, config.rng_seed)
        super(GuidedInstantiation, self).__init__(params, config)
        self.rng = np.random.default_rng(config.rng_seed)
        logger.debug("%s seeded with %d", self.__class__.__name__, config.rng_seed)

    def instantiate(self, state):
        check_deadline(state.deadline)
        graph = export_graph(state, state.bank)
        return guided_round(state.asserted_qes, graph, self.params, self.config, self.done(state),
                            self.rng, state.bank, timings=state.gnn_times)


class DryRunInstantiation(GuidedInstantiation):
    mode = GuidanceMode.DRY_RUN


class RandomizedDryRunInstantiation(GuidedInstantiation):
    mode = GuidanceMode.RANDOMIZED_DRY_RUN


class QSamplingInstantiation(GuidedInstantiation):
    mode = GuidanceMode.QSAMPLING


class ThresholdInstantiation(GuidedInstantiation):
    mode = GuidanceMode.THRESHOLD


class StrategyRegistry(object):
    """
    Maps strategy names to ``InstantiationStrategy`` subclasses.

    To add a strategy, call ``register`` with a name and the class (not
    an instance); ``unregister`` removes it again. This module exports
    an instance holding the built-in strategies as ``registry``.

    """
    def __init__(self):
        self._registry = {}

    def register(self, name, strategy_class):
        """
        Register ``strategy_class`` under ``name``.

        Raise ``AlreadyRegistered`` if the name is taken.

        """
        if name in self._registry:
            raise AlreadyRegistered("The strategy '%s' is already registered" % name)
        self._registry[name] = strategy_class

    def unregister(self, name):
        """
        Remove the strategy registered under ``name``.

        Raise ``NotRegistered`` if there is none.

        """
        if name not in self._registry:
            raise NotRegistered("The strategy '%s' is not registered" % name)
        del self._registry[name]

    def get(self, name):
        try:
            return self._registry[name]
        except KeyError:
            raise NotRegistered("The strategy '%s' is not registered" % name)

    def names(self):
        return sorted(self._registry)

    def __contains__(self, name):
        return name in self._registry

    def create(self, name, params=None, config=None):
        """
        Return a fresh instance of the strategy registered as ``name``.

        """
        strategy_class = self.get(name)
        if strategy_class.needs_weights:
            return strategy_class(params, config)
        return strategy_class()


registry = StrategyRegistry()
registry.register('enum', EnumerativeInstantiation)
registry.register('ematch', EMatchingInstantiation)
registry.register('default', DefaultInstantiation)
registry.register('dry-run', DryRunInstantiation)
registry.register('random-dry-run', RandomizedDryRunInstantiation)
registry.register('qsampling', QSamplingInstantiation)
registry.register('threshold', ThresholdInstantiation)
