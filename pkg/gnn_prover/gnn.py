"""
The guidance network.

A message-passing network over ``ProofStateGraph`` nodes, written
directly against NumPy. Every node starts from the embedding of its
kind. In each layer a node collects ``x_u + e_type`` from its incoming
neighbours, aggregates them by mean and max, and updates its state by
``x' = relu(concat(mean, max) W + b) + x``. Nodes without neighbours
receive the zero message.

Two heads read the final states: a sigmoid score per quantified
expression and, per variable, a softmax over its candidate terms of
``(x_v P_var) . (x_t P_term)``.

``backward`` is the hand-derived reverse pass of ``loss``; ``train``
runs Adam over sampled transitions. Weights are stored as a JSON
manifest line followed by little-endian float32 data.

"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from gnn_prover import conf
from gnn_prover.exceptions import GraphError, WeightsFormatError, WeightsShapeError
from gnn_prover.export import EDGE_TYPE_COUNT
from gnn_prover.terms import KIND_VOCABULARY

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
AGGREGATIONS = ('mean-max', 'mean')


def _xavier(rng, rows, columns, dtype):
    bound = np.sqrt(6.0 / (rows + columns))
    return rng.uniform(-bound, bound, size=(rows, columns)).astype(dtype)


@dataclass
class GnnParameters:
    kind_embeddings: np.ndarray
    edge_vectors: np.ndarray
    layer_weights: list
    layer_biases: list
    qe_weight: np.ndarray
    qe_bias: np.ndarray
    var_proj: np.ndarray
    term_proj: np.ndarray
    aggregation: str = 'mean-max'

    @classmethod
    def initialize(cls, embedding_size=None, layers=None, seed=0, aggregation=None, dtype=np.float32):
        """
        Return freshly initialized parameters: uniform(-0.1, 0.1)
        embeddings and edge vectors, Xavier-uniform matrices and zero
        biases.

        """
        K = conf.get('EMBEDDING_SIZE') if embedding_size is None else embedding_size
        L = conf.get('LAYERS') if layers is None else layers
        aggregation = conf.get('AGGREGATION') if aggregation is None else aggregation
        if aggregation not in AGGREGATIONS:
            raise ValueError("Unknown aggregation '%s'" % aggregation)
        rng = np.random.default_rng(seed)
        width = 2 * K if aggregation == 'mean-max' else K
        return cls(
            kind_embeddings=rng.uniform(-0.1, 0.1, size=(len(KIND_VOCABULARY), K)).astype(dtype),
            edge_vectors=rng.uniform(-0.1, 0.1, size=(EDGE_TYPE_COUNT, K)).astype(dtype),
            layer_weights=[_xavier(rng, width, K, dtype) for _ in range(L)],
            layer_biases=[np.zeros(K, dtype=dtype) for _ in range(L)],
            qe_weight=_xavier(rng, K, 1, dtype),
            qe_bias=np.zeros(1, dtype=dtype),
            var_proj=_xavier(rng, K, K, dtype),
            term_proj=_xavier(rng, K, K, dtype),
            aggregation=aggregation,
        )

    @property
    def embedding_size(self):
        return self.kind_embeddings.shape[1]

    @property
    def layers(self):
        return len(self.layer_weights)

    @property
    def dtype(self):
        return self.kind_embeddings.dtype

    def tensors(self):
        """
        Return ``(name, array)`` pairs in manifest order.

        """
        pairs = [('kind_embeddings', self.kind_embeddings), ('edge_vectors', self.edge_vectors)]
        for layer, (weight, bias) in enumerate(zip(self.layer_weights, self.layer_biases)):
            pairs.append(('layer_%d.weight' % layer, weight))
            pairs.append(('layer_%d.bias' % layer, bias))
        pairs.extend([
            ('qe_head.weight', self.qe_weight),
            ('qe_head.bias', self.qe_bias),
            ('var_proj', self.var_proj),
            ('term_proj', self.term_proj),
        ])
        return pairs

    def _map(self, function):
        return GnnParameters(
            kind_embeddings=function(self.kind_embeddings),
            edge_vectors=function(self.edge_vectors),
            layer_weights=[function(weight) for weight in self.layer_weights],
            layer_biases=[function(bias) for bias in self.layer_biases],
            qe_weight=function(self.qe_weight),
            qe_bias=function(self.qe_bias),
            var_proj=function(self.var_proj),
            term_proj=function(self.term_proj),
            aggregation=self.aggregation,
        )

    def copy(self):
        return self._map(np.copy)

    def zeros_like(self):
        return self._map(np.zeros_like)

    def astype(self, dtype):
        return self._map(lambda array: array.astype(dtype))

    def scaled(self, factor):
        return self._map(lambda array: array * factor)


def expected_shapes(K, L, aggregation):
    width = 2 * K if aggregation == 'mean-max' else K
    shapes = [('kind_embeddings', (len(KIND_VOCABULARY), K)), ('edge_vectors', (EDGE_TYPE_COUNT, K))]
    for layer in range(L):
        shapes.append(('layer_%d.weight' % layer, (width, K)))
        shapes.append(('layer_%d.bias' % layer, (K,)))
    shapes.extend([('qe_head.weight', (K, 1)), ('qe_head.bias', (1,)), ('var_proj', (K, K)), ('term_proj', (K, K))])
    return shapes


def _from_tensors(arrays, aggregation):
    L = (len(arrays) - 6) // 2
    return GnnParameters(
        kind_embeddings=arrays[0],
        edge_vectors=arrays[1],
        layer_weights=[arrays[2 + 2 * layer] for layer in range(L)],
        layer_biases=[arrays[3 + 2 * layer] for layer in range(L)],
        qe_weight=arrays[-4],
        qe_bias=arrays[-3],
        var_proj=arrays[-2],
        term_proj=arrays[-1],
        aggregation=aggregation,
    )


@dataclass
class _Structure:
    """
    Edge arrays of a graph sorted by ``(dst, src, type)``, with the
    segment of every node that has incoming edges.

    """
    src: np.ndarray
    dst: np.ndarray
    types: np.ndarray
    counts: np.ndarray
    receivers: np.ndarray
    starts: np.ndarray


def _structure(graph, params):
    n = graph.node_count
    kinds = np.asarray(graph.node_kinds, dtype=np.int64)
    if n and (kinds.min() < 0 or kinds.max() >= params.kind_embeddings.shape[0]):
        raise GraphError("Node kind outside the kind vocabulary")
    edges = sorted((int(dst), int(src), int(kind)) for src, dst, kind in graph.edges)
    if edges:
        dst, src, types = (np.asarray(column, dtype=np.int64) for column in zip(*edges))
    else:
        dst = src = types = np.zeros(0, dtype=np.int64)
    if len(types) and (types.min() < 0 or types.max() >= params.edge_vectors.shape[0]):
        raise GraphError("Edge type outside 0..%d" % (params.edge_vectors.shape[0] - 1))
    if len(src) and (max(src.max(), dst.max()) >= n or min(src.min(), dst.min()) < 0):
        raise GraphError("Edge endpoint outside the graph")
    counts = np.bincount(dst, minlength=n)
    receivers = np.nonzero(counts)[0]
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]) if n else np.zeros(0, dtype=np.int64)
    return _Structure(src, dst, types, counts, receivers, offsets[receivers])


@dataclass
class ForwardResult:
    qe_scores: np.ndarray
    term_distributions: list
    embeddings: np.ndarray
    qe_logits: np.ndarray = None
    term_logits: list = field(default_factory=list)
    cache: dict = field(default_factory=dict, repr=False)


def _aggregate(X, structure, edge_vectors, aggregation):
    n, K = X.shape
    messages = X[structure.src] + edge_vectors[structure.types]
    mean = np.zeros((n, K), dtype=X.dtype)
    maximum = np.zeros((n, K), dtype=X.dtype)
    if len(structure.receivers):
        sums = np.add.reduceat(messages.astype(np.float64), structure.starts, axis=0)
        mean[structure.receivers] = (sums / structure.counts[structure.receivers][:, None]).astype(X.dtype)
        maximum[structure.receivers] = np.maximum.reduceat(messages, structure.starts, axis=0)
    if aggregation == 'mean':
        return messages, mean, maximum, mean
    return messages, mean, maximum, np.concatenate([mean, maximum], axis=1)


def _softmax(logits):
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def forward(params, graph, strict=True):
    """
    Run the network on ``graph``.

    Returns a ``ForwardResult`` whose ``term_distributions[i][j]`` is
    the distribution over ``graph.candidate_terms[i][j]``. A variable
    without candidates raises ``GraphError``, or yields ``None`` when
    ``strict`` is false.

    """
    structure = _structure(graph, params)
    X = params.kind_embeddings[np.asarray(graph.node_kinds, dtype=np.int64)].astype(params.dtype)
    layers = []
    for weight, bias in zip(params.layer_weights, params.layer_biases):
        if weight.shape[0] != (2 if params.aggregation == 'mean-max' else 1) * X.shape[1]:
            raise GraphError("Layer weight of shape %s does not fit embedding size %d" % (weight.shape, X.shape[1]))
        messages, mean, maximum, hidden = _aggregate(X, structure, params.edge_vectors, params.aggregation)
        pre = hidden @ weight + bias
        layers.append({'X': X, 'messages': messages, 'maximum': maximum, 'hidden': hidden, 'pre': pre})
        X = np.maximum(pre, 0) + X
    qe_nodes = np.asarray(graph.qe_nodes, dtype=np.int64)
    qe_logits = (X[qe_nodes].astype(np.float64) @ params.qe_weight.astype(np.float64)).reshape(-1)
    qe_logits = qe_logits + float(params.qe_bias[0])
    qe_scores = 1.0 / (1.0 + np.exp(-qe_logits))
    var_proj = params.var_proj.astype(np.float64)
    term_proj = params.term_proj.astype(np.float64)
    term_logits, distributions = [], []
    for var_nodes, candidates in zip(graph.var_nodes, graph.candidate_terms):
        per_qe_logits, per_qe = [], []
        for var_node, terms in zip(var_nodes, candidates):
            if not terms:
                if strict:
                    raise GraphError("Variable node %d has no candidate terms" % var_node)
                per_qe_logits.append(None)
                per_qe.append(None)
                continue
            query = X[var_node].astype(np.float64) @ var_proj
            keys = X[np.asarray(terms, dtype=np.int64)].astype(np.float64) @ term_proj
            logits = keys @ query
            per_qe_logits.append(logits)
            per_qe.append(_softmax(logits))
        term_logits.append(per_qe_logits)
        distributions.append(per_qe)
    return ForwardResult(qe_scores, distributions, X, qe_logits, term_logits,
                         cache={'structure': structure, 'layers': layers})


def _loss_parts(result, transition):
    labels = np.asarray(transition.qe_labels, dtype=np.float64)
    logits = result.qe_logits
    bce = float(np.mean(np.logaddexp(0.0, logits) - labels * logits)) if len(logits) else 0.0
    terms = []
    for slot, term_labels in enumerate(transition.term_labels):
        if term_labels is None:
            continue
        for variable, label in enumerate(term_labels):
            logits_v = result.term_logits[slot][variable]
            top = logits_v.max()
            terms.append(top + np.log(np.exp(logits_v - top).sum()) - logits_v[label])
    ce = float(np.mean(terms)) if terms else 0.0
    return bce, ce


def loss(params, transition, weight=1.0):
    """
    Mean binary cross-entropy over the quantified expressions plus mean
    cross-entropy over the labelled variables.

    """
    bce, ce = _loss_parts(forward(params, transition.graph), transition)
    return weight * (bce + ce)


def _first_max_mask(messages, maximum, structure):
    """
    Mark, per receiving node and feature, the first incoming message
    equal to the maximum.

    """
    hits = messages == maximum[structure.dst]
    running = np.cumsum(hits, axis=0)
    starts = structure.starts
    segment_base = np.where(starts[:, None] > 0, running[np.maximum(starts - 1, 0)], 0)
    before = np.repeat(segment_base, structure.counts[structure.receivers], axis=0)
    return hits & (running - before == 1)


def backward(params, transition, weight=1.0):
    """
    Return ``(loss, gradients)`` for ``transition``; ``gradients`` is a
    ``GnnParameters`` of the same shapes as ``params``.

    """
    graph = transition.graph
    result = forward(params, graph)
    bce, ce = _loss_parts(result, transition)
    grads = params.zeros_like().astype(np.float64)
    X = result.embeddings.astype(np.float64)
    dX = np.zeros_like(X)

    qe_nodes = np.asarray(graph.qe_nodes, dtype=np.int64)
    if len(qe_nodes):
        labels = np.asarray(transition.qe_labels, dtype=np.float64)
        dlogits = weight * (result.qe_scores - labels) / len(qe_nodes)
        grads.qe_weight += (X[qe_nodes].T @ dlogits)[:, None]
        grads.qe_bias += dlogits.sum()
        np.add.at(dX, qe_nodes, dlogits[:, None] * params.qe_weight.astype(np.float64).reshape(1, -1))

    labelled = [(slot, variable, label) for slot, term_labels in enumerate(transition.term_labels)
                if term_labels is not None for variable, label in enumerate(term_labels)]
    var_proj = params.var_proj.astype(np.float64)
    term_proj = params.term_proj.astype(np.float64)
    for slot, variable, label in labelled:
        var_node = graph.var_nodes[slot][variable]
        terms = np.asarray(graph.candidate_terms[slot][variable], dtype=np.int64)
        dlogits = result.term_distributions[slot][variable].copy()
        dlogits[label] -= 1.0
        dlogits *= weight / len(labelled)
        query = X[var_node] @ var_proj
        keys = X[terms] @ term_proj
        dquery = keys.T @ dlogits
        dkeys = np.outer(dlogits, query)
        grads.var_proj += np.outer(X[var_node], dquery)
        dX[var_node] += var_proj @ dquery
        grads.term_proj += X[terms].T @ dkeys
        np.add.at(dX, terms, dkeys @ term_proj.T)

    structure = result.cache['structure']
    K = params.embedding_size
    for layer in reversed(range(params.layers)):
        cache = result.cache['layers'][layer]
        W = params.layer_weights[layer].astype(np.float64)
        dpre = dX * (cache['pre'] > 0)
        grads.layer_weights[layer] += cache['hidden'].astype(np.float64).T @ dpre
        grads.layer_biases[layer] += dpre.sum(axis=0)
        dhidden = dpre @ W.T
        if len(structure.src):
            counts = structure.counts[structure.dst][:, None].astype(np.float64)
            dmessages = dhidden[structure.dst, :K] / counts
            if params.aggregation == 'mean-max':
                mask = _first_max_mask(cache['messages'], cache['maximum'], structure)
                dmessages = dmessages + mask * dhidden[structure.dst, K:]
            np.add.at(dX, structure.src, dmessages)
            np.add.at(grads.edge_vectors, structure.types, dmessages)
    np.add.at(grads.kind_embeddings, np.asarray(graph.node_kinds, dtype=np.int64), dX)
    return weight * (bce + ce), grads.astype(params.dtype)


class Adam:
    """
    Adam with bias correction, updating a ``GnnParameters`` in place.

    """
    def __init__(self, params, learning_rate=None, betas=(0.9, 0.999), eps=1e-8):
        self.learning_rate = conf.get('LEARNING_RATE') if learning_rate is None else learning_rate
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.steps = 0
        self.first = [np.zeros_like(array) for _, array in params.tensors()]
        self.second = [np.zeros_like(array) for _, array in params.tensors()]

    def step(self, params, grads):
        self.steps += 1
        correction1 = 1.0 - self.beta1 ** self.steps
        correction2 = 1.0 - self.beta2 ** self.steps
        pairs = zip(params.tensors(), grads.tensors(), self.first, self.second)
        for (_, value), (_, grad), first, second in pairs:
            first *= self.beta1
            first += (1.0 - self.beta1) * grad
            second *= self.beta2
            second += (1.0 - self.beta2) * grad * grad
            update = (first / correction1) / (np.sqrt(second / correction2) + self.eps)
            value -= (self.learning_rate * update).astype(value.dtype)


def train(params, transitions, iterations, seed=0, learning_rate=None):
    """
    Train a copy of ``params``. Each iteration samples one transition
    per problem, in problem-name order, and takes one Adam step per
    sample. Returns the trained parameters and the mean loss of every
    iteration.

    """
    if not transitions:
        raise ValueError("Cannot train on an empty dataset")
    params = params.copy()
    by_problem = {}
    for transition in transitions:
        by_problem.setdefault(transition.problem_name, []).append(transition)
    names = sorted(by_problem)
    rng = np.random.default_rng(seed)
    optimizer = Adam(params, learning_rate)
    losses = []
    for iteration in range(iterations):
        total = 0.0
        for name in names:
            candidates = by_problem[name]
            sample = candidates[int(rng.integers(len(candidates)))]
            value, grads = backward(params, sample)
            optimizer.step(params, grads)
            total += value
        losses.append(total / len(names))
        logger.debug("Iteration %d: mean loss %.6f", iteration + 1, losses[-1])
    return params, losses


def evaluate_metrics(params, transitions):
    """
    Return term top-1 accuracy over labelled variables and the true
    positive and true negative rates of the quantified-expression score
    at 0.5.

    """
    hits = labelled = positives = true_positives = negatives = true_negatives = 0
    for transition in transitions:
        result = forward(params, transition.graph)
        for score, label in zip(result.qe_scores, transition.qe_labels):
            if label:
                positives += 1
                true_positives += score > 0.5
            else:
                negatives += 1
                true_negatives += score <= 0.5
        for slot, term_labels in enumerate(transition.term_labels):
            if term_labels is None:
                continue
            for variable, label in enumerate(term_labels):
                labelled += 1
                hits += int(np.argmax(result.term_distributions[slot][variable])) == label

    def rate(count, total):
        return float(count) / total if total else 0.0

    return {
        'term_accuracy': rate(hits, labelled),
        'qe_tpr': rate(true_positives, positives),
        'qe_tnr': rate(true_negatives, negatives),
        'labelled_variables': labelled,
        'positive_qes': positives,
        'negative_qes': negatives,
    }


def save_params(params, path):
    tensors = [(name, np.ascontiguousarray(array, dtype='<f4')) for name, array in params.tensors()]
    index, offset = [], 0
    for name, array in tensors:
        index.append({'name': name, 'shape': list(array.shape), 'offset': offset})
        offset += array.size
    manifest = {
        'format_version': FORMAT_VERSION,
        'K': params.embedding_size,
        'L': params.layers,
        'aggregation': params.aggregation,
        'kind_vocabulary': list(KIND_VOCABULARY),
        'edge_type_count': EDGE_TYPE_COUNT,
        'tensors': index,
    }
    with open(path, 'wb') as handle:
        handle.write(json.dumps(manifest, sort_keys=True, separators=(',', ':')).encode('utf-8') + b'\n')
        for _, array in tensors:
            handle.write(array.tobytes())


def load_params(path):
    """
    Load parameters written by ``save_params``. Damaged or foreign files
    raise ``WeightsFormatError``; tensors that disagree with the
    manifest's dimensions raise ``WeightsShapeError``.

    """
    with open(path, 'rb') as handle:
        data = handle.read()
    head, newline, body = data.partition(b'\n')
    if not newline:
        raise WeightsFormatError("%s has no weight manifest" % path)
    try:
        manifest = json.loads(head.decode('utf-8'))
        version = manifest['format_version']
        K, L, aggregation, index = manifest['K'], manifest['L'], manifest['aggregation'], manifest['tensors']
    except (ValueError, KeyError, TypeError):
        raise WeightsFormatError("%s has a malformed weight manifest" % path)
    if version != FORMAT_VERSION:
        raise WeightsFormatError("%s is weight format %s, expected %d" % (path, version, FORMAT_VERSION))
    if manifest.get('kind_vocabulary') != list(KIND_VOCABULARY) or manifest.get('edge_type_count') != EDGE_TYPE_COUNT:
        raise WeightsFormatError("%s was trained for a different graph vocabulary" % path)
    if aggregation not in AGGREGATIONS:
        raise WeightsFormatError("%s uses unknown aggregation '%s'" % (path, aggregation))
    expected = expected_shapes(K, L, aggregation)
    if [entry.get('name') for entry in index] != [name for name, _ in expected]:
        raise WeightsFormatError("%s lists unexpected tensors" % path)
    for entry, (name, shape) in zip(index, expected):
        if tuple(entry['shape']) != shape:
            raise WeightsShapeError("Tensor %s has shape %s, expected %s for K=%d" % (name, tuple(entry['shape']), shape, K))
    total = sum(int(np.prod(shape)) for _, shape in expected)
    if len(body) != 4 * total:
        raise WeightsFormatError("%s holds %d bytes of weights, expected %d" % (path, len(body), 4 * total))
    values = np.frombuffer(body, dtype='<f4')
    arrays = []
    for entry, (_, shape) in zip(index, expected):
        size = int(np.prod(shape))
        arrays.append(values[entry['offset']:entry['offset'] + size].reshape(shape).astype(np.float32))
    return _from_tensors(arrays, aggregation)
