"""
EiDS 时间序列预测工具包

从零实现的 LSTM 基线（vanilla / stacked / bidirectional）与情绪启发的三子网络 EiDS 模型，
以及时延嵌入、训练、评估和 table1 / fig3 预设实验网格。
"""

__version__ = "0.1.0"
__author__ = "EiDS Forecasting Project"
