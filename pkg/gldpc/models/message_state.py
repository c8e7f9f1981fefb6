import numpy as np

from gldpc.models.tanner_graph import GeneralizedTannerGraph
from gldpc.services.channel_service import clamp_llr


class MessageState:
    """
    All edge messages and posteriors of one decode attempt. Owned by a single decode call.

    m_vc / m_cv are flat slot arrays (see GeneralizedTannerGraph); edges start with
    m_vc = L_v and m_cv = 0, and the posterior starts at the channel LLRs. Channel LLRs are
    clipped to [-L_MAX, L_MAX] on entry, so every message stays within that range.
    """

    def __init__(self, graph: GeneralizedTannerGraph, channel: np.ndarray):
        channel = np.asarray(channel, dtype=np.float64)
        if channel.shape != (graph.n,):
            raise ValueError(f"expected {graph.n} channel LLRs, got shape {channel.shape}")
        self.channel = clamp_llr(channel)
        self.m_vc = np.zeros(graph.slot_count + 1, dtype=np.float64)
        self.m_vc[graph.edge_slots] = self.channel[graph.edge_vn]
        self.m_cv = np.zeros(graph.slot_count + 1, dtype=np.float64)
        self.posterior = self.channel.copy()
        self.iteration = 0
        self.spcn_to_vn_messages = 0
        self.vn_update_counts = np.zeros(graph.n, dtype=np.int64)

    def copy(self) -> "MessageState":
        clone = MessageState.__new__(MessageState)
        clone.channel = self.channel
        clone.m_vc = self.m_vc.copy()
        clone.m_cv = self.m_cv.copy()
        clone.posterior = self.posterior.copy()
        clone.iteration = self.iteration
        clone.spcn_to_vn_messages = self.spcn_to_vn_messages
        clone.vn_update_counts = self.vn_update_counts.copy()
        return clone
