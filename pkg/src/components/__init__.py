"""
命令行输出组件
"""
